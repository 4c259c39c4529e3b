use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use super::{EvalError, Result};

/// One recorded utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub speaker: String,
    pub word: String,
    pub take: u32,
    /// Pitch-shifted clone of another entry.
    pub augmented: bool,
}

impl ManifestEntry {
    pub fn new(path: impl Into<PathBuf>, speaker: &str, word: &str, take: u32) -> Self {
        Self {
            path: path.into(),
            speaker: speaker.to_string(),
            word: word.to_string(),
            take,
            augmented: false,
        }
    }

    pub fn key(&self) -> (&str, &str, u32) {
        (&self.speaker, &self.word, self.take)
    }
}

/// Validated list of utterances with sorted vocabulary and speaker lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    vocabulary: Vec<String>,
    speakers: Vec<String>,
}

impl DatasetManifest {
    /// Builds a manifest from in-memory entries. Duplicate keys are reported
    /// with 1-based entry positions.
    pub fn from_entries(entries: Vec<ManifestEntry>) -> Result<Self> {
        let lines: Vec<u64> = (1..=entries.len() as u64).collect();
        Self::with_lines(entries, &lines)
    }

    fn with_lines(entries: Vec<ManifestEntry>, lines: &[u64]) -> Result<Self> {
        let mut seen: BTreeMap<(&str, &str, u32), u64> = BTreeMap::new();
        for (entry, line) in entries.iter().zip(lines) {
            if entry.speaker.is_empty() || entry.word.is_empty() {
                return Err(EvalError::Malformed {
                    line: *line,
                    reason: "speaker and word must be non-empty".into(),
                });
            }
            if let Some(first) = seen.insert(entry.key(), *line) {
                return Err(EvalError::Duplicate {
                    speaker: entry.speaker.clone(),
                    word: entry.word.clone(),
                    take: entry.take,
                    first,
                    second: *line,
                });
            }
        }
        let vocabulary: BTreeSet<&str> = entries.iter().map(|e| e.word.as_str()).collect();
        let speakers: BTreeSet<&str> = entries.iter().map(|e| e.speaker.as_str()).collect();
        let vocabulary = vocabulary.into_iter().map(String::from).collect();
        let speakers = speakers.into_iter().map(String::from).collect();
        Ok(Self {
            entries,
            vocabulary,
            speakers,
        })
    }

    /// Reads a CSV manifest with header `path,speaker,word,take` and an
    /// optional `augmented` column. Relative paths resolve against the
    /// manifest's directory; every referenced file must exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let (entries, lines) = parse_csv(&text, base)?;
        for (entry, line) in entries.iter().zip(&lines) {
            if !entry.path.is_file() {
                return Err(EvalError::MissingFile {
                    line: *line,
                    path: entry.path.clone(),
                });
            }
        }
        Self::with_lines(entries, &lines)
    }

    /// Parses CSV text without touching the file system.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let (entries, lines) = parse_csv(text, base)?;
        Self::with_lines(entries, &lines)
    }

    /// CSV rendering; paths under `base` are written relative to it.
    pub fn to_csv(&self, base: &Path) -> String {
        let with_flag = self.entries.iter().any(|e| e.augmented);
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec!["path", "speaker", "word", "take"];
        if with_flag {
            header.push("augmented");
        }
        w.write_record(&header).expect("in-memory write");
        for e in &self.entries {
            let p = e.path.strip_prefix(base).unwrap_or(&e.path);
            let p = p.to_string_lossy().replace('\\', "/");
            let take = e.take.to_string();
            let mut row = vec![p.as_str(), e.speaker.as_str(), e.word.as_str(), take.as_str()];
            if with_flag {
                row.push(if e.augmented { "1" } else { "0" });
            }
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn speakers(&self) -> &[String] {
        &self.speakers
    }

    /// Index of the entry with the given key.
    pub fn find(&self, speaker: &str, word: &str, take: u32) -> Option<usize> {
        self.entries.iter().position(|e| e.key() == (speaker, word, take))
    }
}

fn parse_csv(text: &str, base: &Path) -> Result<(Vec<ManifestEntry>, Vec<u64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| EvalError::Malformed {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    let names: Vec<&str> = header.iter().collect();
    let has_flag = match names.as_slice() {
        ["path", "speaker", "word", "take"] => false,
        ["path", "speaker", "word", "take", "augmented"] => true,
        _ => {
            return Err(EvalError::Malformed {
                line: 1,
                reason: format!("header must be path,speaker,word,take[,augmented], got {}", names.join(",")),
            })
        }
    };
    let mut entries = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| EvalError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: String| EvalError::Malformed { line, reason };
        let expected = if has_flag { 5 } else { 4 };
        if record.len() != expected {
            return Err(bad(format!("expected {expected} fields, found {}", record.len())));
        }
        if record[0].is_empty() {
            return Err(bad("empty path".into()));
        }
        let take = record[3]
            .parse::<u32>()
            .map_err(|_| bad(format!("take {:?} is not a non-negative integer", &record[3])))?;
        let augmented = if has_flag {
            match &record[4] {
                "0" | "false" | "" => false,
                "1" | "true" => true,
                other => return Err(bad(format!("augmented flag {other:?} is not 0 or 1"))),
            }
        } else {
            false
        };
        let rel = PathBuf::from(&record[0]);
        entries.push(ManifestEntry {
            path: if rel.is_absolute() { rel } else { base.join(rel) },
            speaker: record[1].to_string(),
            word: record[2].to_string(),
            take,
            augmented,
        });
        lines.push(line);
    }
    Ok((entries, lines))
}
