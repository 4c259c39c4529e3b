use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClassifierKind, EvalError, FeatureSet, Result, TrainedModel};
use crate::config::ToolConfig;

/// Utterances per word: total, held out, trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub total: usize,
    pub test: usize,
    pub train: usize,
}

/// The six utterance levels of the published sweep table.
pub const TABLE_II_LEVELS: [SweepLevel; 6] = [
    SweepLevel { total: 10, test: 3, train: 7 },
    SweepLevel { total: 15, test: 4, train: 11 },
    SweepLevel { total: 20, test: 6, train: 14 },
    SweepLevel { total: 25, test: 7, train: 18 },
    SweepLevel { total: 30, test: 9, train: 21 },
    SweepLevel { total: 35, test: 10, train: 25 },
];

impl SweepLevel {
    /// Whether the printed total equals test plus train.
    pub fn is_consistent(&self) -> bool {
        self.total == self.test + self.train
    }
}

impl FromStr for SweepLevel {
    type Err = EvalError;

    /// Parses `total:test:train`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let nums = parts
            .iter()
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| EvalError::InvalidLevel(format!("{s:?} is not total:test:train")))?;
        match nums.as_slice() {
            [total, test, train] if *test > 0 && *train > 0 => Ok(Self {
                total: *total,
                test: *test,
                train: *train,
            }),
            [_, _, _] => Err(EvalError::InvalidLevel(format!("{s:?} needs test and train >= 1"))),
            _ => Err(EvalError::InvalidLevel(format!("{s:?} is not total:test:train"))),
        }
    }
}

impl fmt::Display for SweepLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.total, self.test, self.train)
    }
}

/// Parses a comma-separated list of levels.
pub fn parse_levels(s: &str) -> Result<Vec<SweepLevel>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Test and train utterances come from disjoint speaker pools.
    SpeakerIndependent,
    /// Utterances of each word are drawn from all speakers together.
    Pooled,
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMode::SpeakerIndependent => "speaker-independent",
            SweepMode::Pooled => "pooled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub total: usize,
    pub test: usize,
    pub train: usize,
    /// False when total differs from test + train.
    pub consistent: bool,
    pub per_run: Vec<f64>,
    /// Mean accuracy over runs, in percent.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub classifier: ClassifierKind,
    pub mode: SweepMode,
    pub seeds: Vec<u64>,
    pub rows: Vec<SweepRow>,
    /// Consecutive row pairs whose accuracy did not decrease.
    pub non_decreasing_steps: usize,
    pub steps: usize,
    pub config_fingerprint: String,
}

/// Test and train entry indices for one level and seed.
fn select(set: &FeatureSet, level: SweepLevel, mode: SweepMode, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let entries = set.manifest().entries();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_word: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate().filter(|(_, e)| !e.augmented) {
        by_word.entry(&e.word).or_default().push(i);
    }
    let (mut test, mut train) = (Vec::new(), Vec::new());
    let short = |word: &str, have: usize, need: usize, side: &str| {
        EvalError::InvalidLevel(format!(
            "level {level} needs {need} {side} utterances of {word}, only {have} available"
        ))
    };
    match mode {
        SweepMode::Pooled => {
            for (word, mut idx) in by_word {
                if idx.len() < level.test + level.train {
                    return Err(short(word, idx.len(), level.test + level.train, "total"));
                }
                idx.shuffle(&mut rng);
                test.extend(&idx[..level.test]);
                train.extend(&idx[level.test..level.test + level.train]);
            }
        }
        SweepMode::SpeakerIndependent => {
            let mut speakers: Vec<&str> = set.manifest().speakers().iter().map(String::as_str).collect();
            speakers.shuffle(&mut rng);
            // Take only as many speakers as the level needs, so a level uses
            // distinct voices on each side.
            let n_test_spk = level.test.min(speakers.len());
            let test_spk: BTreeSet<&str> = speakers[..n_test_spk].iter().copied().collect();
            for (word, idx) in by_word {
                let (mut te, mut tr): (Vec<usize>, Vec<usize>) = idx
                    .into_iter()
                    .partition(|&i| test_spk.contains(entries[i].speaker.as_str()));
                if te.len() < level.test {
                    return Err(short(word, te.len(), level.test, "test-speaker"));
                }
                if tr.len() < level.train {
                    return Err(short(word, tr.len(), level.train, "train-speaker"));
                }
                te.shuffle(&mut rng);
                tr.shuffle(&mut rng);
                test.extend(&te[..level.test]);
                train.extend(&tr[..level.train]);
            }
        }
    }
    test.sort_unstable();
    train.sort_unstable();
    Ok((test, train))
}

/// Accuracy as a function of utterances per word. Each level subsamples the
/// corpus once per seed, trains, tests and averages.
pub fn utterance_sweep(
    set: &FeatureSet,
    classifier: ClassifierKind,
    mode: SweepMode,
    levels: &[SweepLevel],
    seeds: &[u64],
    config: &ToolConfig,
) -> Result<SweepReport> {
    if seeds.is_empty() {
        return Err(EvalError::InvalidLevel("at least one seed is required".into()));
    }
    // Validate every level before spending time on training.
    for level in levels {
        select(set, *level, mode, seeds[0])?;
    }
    let jobs: Vec<(usize, u64)> = (0..levels.len())
        .flat_map(|l| seeds.iter().map(move |&s| (l, s)))
        .collect();
    let accuracies = jobs
        .par_iter()
        .map(|&(l, seed)| {
            let (test, train) = select(set, levels[l], mode, seed)?;
            let model = TrainedModel::train(classifier, &set.labeled(&train), config, seed)?;
            let (correct, _) = model.evaluate(set, &test)?;
            Ok(100.0 * correct as f64 / test.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows: Vec<SweepRow> = levels
        .iter()
        .zip(accuracies.chunks(seeds.len()))
        .map(|(level, per_run)| SweepRow {
            total: level.total,
            test: level.test,
            train: level.train,
            consistent: level.is_consistent(),
            per_run: per_run.to_vec(),
            accuracy: per_run.iter().sum::<f64>() / per_run.len() as f64,
        })
        .collect();
    let non_decreasing_steps = rows.windows(2).filter(|w| w[1].accuracy >= w[0].accuracy).count();
    Ok(SweepReport {
        classifier,
        mode,
        seeds: seeds.to_vec(),
        steps: rows.len().saturating_sub(1),
        non_decreasing_steps,
        rows,
        config_fingerprint: config.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{DatasetManifest, ManifestEntry};
    use crate::features::FeatureMatrix;

    #[test]
    fn parses_levels() {
        let levels = parse_levels("10:3:7, 35:10:25").unwrap();
        assert_eq!(levels, vec![TABLE_II_LEVELS[0], TABLE_II_LEVELS[5]]);
        assert!(parse_levels("10:3").is_err());
        assert!(parse_levels("10:0:10").is_err());
        assert!(parse_levels("a:b:c").is_err());
        assert_eq!(TABLE_II_LEVELS[3].to_string(), "25:7:18");
    }

    #[test]
    fn printed_levels_add_up() {
        assert!(TABLE_II_LEVELS.iter().all(SweepLevel::is_consistent));
        assert!(!"12:3:7".parse::<SweepLevel>().unwrap().is_consistent());
    }

    fn set(speakers: usize, takes: u32) -> FeatureSet {
        let mut entries = Vec::new();
        let mut feats = Vec::new();
        for s in 0..speakers {
            for (w, level) in [("a", 2.0), ("b", -2.0)] {
                for t in 0..takes {
                    entries.push(ManifestEntry::new(format!("{s}{w}{t}"), &format!("s{s:02}"), w, t));
                    feats.push(FeatureMatrix::new(1, vec![level + 0.01 * s as f64; 12]).unwrap());
                }
            }
        }
        FeatureSet::new(DatasetManifest::from_entries(entries).unwrap(), feats).unwrap()
    }

    #[test]
    fn selection_respects_counts_and_speakers() {
        let fs = set(12, 1);
        let level = SweepLevel { total: 10, test: 3, train: 7 };
        let (test, train) = select(&fs, level, SweepMode::SpeakerIndependent, 1).unwrap();
        assert_eq!((test.len(), train.len()), (6, 14));
        let spk = |idx: &[usize]| -> BTreeSet<String> {
            idx.iter().map(|&i| fs.manifest().entries()[i].speaker.clone()).collect()
        };
        assert!(spk(&test).is_disjoint(&spk(&train)));
        assert_eq!(select(&fs, level, SweepMode::SpeakerIndependent, 1).unwrap(), (test, train));
    }

    #[test]
    fn oversized_level_is_an_error() {
        let fs = set(5, 2);
        let level = SweepLevel { total: 11, test: 3, train: 8 };
        assert!(select(&fs, level, SweepMode::Pooled, 0).is_err());
        assert!(select(&fs, SweepLevel { total: 10, test: 3, train: 7 }, SweepMode::Pooled, 0).is_ok());
    }

    #[test]
    fn sweep_emits_one_row_per_level() {
        let fs = set(4, 3);
        let mut cfg = ToolConfig::default();
        cfg.hmm.n_states = 2;
        cfg.hmm.n_mixtures = 1;
        let levels = parse_levels("4:2:2,6:2:4").unwrap();
        let r = utterance_sweep(&fs, ClassifierKind::Hmm, SweepMode::Pooled, &levels, &[1, 2], &cfg).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!((r.rows[1].total, r.rows[1].test, r.rows[1].train), (6, 2, 4));
        assert_eq!(r.steps, 1);
        assert!(r.rows.iter().all(|row| row.per_run.len() == 2));
    }
}
