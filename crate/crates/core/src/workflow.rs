//! File-level commands: each reads upstream artifacts, writes its own into
//! an output directory and reports per-item failures.
//!
//! Artifacts hold only paths relative to their own directory and no
//! timestamps, so re-running a command with the same inputs, config and
//! seeds reproduces every file byte for byte.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::{enhance_with_report, load_clip, read_wav, write_wav, AudioClip, EnhancementReport};
use crate::config::{ConfigError, Provenance, ToolConfig};
use crate::dnn::MlpModel;
use crate::eval::{
    augment_corpus, emit_report, format_sweep, make_split, run_experiment, utterance_sweep, ClassifierKind,
    DatasetManifest, EvalError, EvalReport, ExperimentSpec, FeatureSet, ManifestEntry, ReportRow, RunResult,
    SplitMode, SweepLevel, SweepMode, TrainedModel,
};
use crate::features::{write_features, MfccExtractor};
use crate::hmm::WordClassifier;
use crate::synth::{generate, SynthSpec};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const FEATURE_INDEX_FILE: &str = "features.json";
pub const FEATURE_INDEX_FORMAT: &str = "isoword-features";

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("missing upstream artifact {0}")]
    MissingArtifact(PathBuf),
    #[error("{what} fingerprint mismatch: expected {expected}, found {found}")]
    Fingerprint {
        what: String,
        expected: String,
        found: String,
    },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<crate::audio::AudioError> for WorkflowError {
    fn from(e: crate::audio::AudioError) -> Self {
        WorkflowError::Eval(e.into())
    }
}

impl From<crate::features::FeatureError> for WorkflowError {
    fn from(e: crate::features::FeatureError) -> Self {
        WorkflowError::Eval(e.into())
    }
}

impl From<crate::hmm::HmmError> for WorkflowError {
    fn from(e: crate::hmm::HmmError) -> Self {
        WorkflowError::Eval(e.into())
    }
}

impl From<crate::dnn::DnnError> for WorkflowError {
    fn from(e: crate::dnn::DnnError) -> Self {
        WorkflowError::Eval(e.into())
    }
}

pub type Result<T> = std::result::Result<T, WorkflowError>;

/// One input that could not be processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemFailure {
    pub path: String,
    pub reason: String,
}

/// Summary of a command run. A command succeeded iff `failures` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub failures: Vec<ItemFailure>,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn io_err(path: &Path, e: impl ToString) -> WorkflowError {
    WorkflowError::Io {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let tmp = temp_path(path);
    std::fs::write(&tmp, bytes).map_err(|e| io_err(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_wav_atomic(clip: &AudioClip, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let tmp = temp_path(path);
    write_wav(clip, &tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| WorkflowError::Format(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(WorkflowError::MissingArtifact(path.to_path_buf()));
    }
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .replace('\\', "/")
}

fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    if !path.exists() {
        return Err(WorkflowError::MissingArtifact(path.to_path_buf()));
    }
    Ok(DatasetManifest::load(path)?)
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write_manifest(manifest: &DatasetManifest, out: &Path) -> Result<PathBuf> {
    let path = out.join(MANIFEST_FILE);
    write_atomic(&path, manifest.to_csv(out).as_bytes())?;
    Ok(path)
}

fn audio_name(index: usize) -> PathBuf {
    PathBuf::from("audio").join(format!("{index:05}.wav"))
}

#[derive(Serialize)]
struct PrepareRecord<'a> {
    source: String,
    output: String,
    #[serde(flatten)]
    report: &'a EnhancementReport,
}

#[derive(Serialize)]
struct CommandLog<T> {
    command: &'static str,
    config_fingerprint: String,
    items: Vec<T>,
    failures: Vec<ItemFailure>,
}

/// Runs the enhancement chain over every clip of a manifest.
///
/// Writes `audio/NNNNN.wav`, a manifest of the clips that succeeded and
/// `prepare.json` with per-file stage effects and failures.
pub fn cmd_prepare(manifest_path: &Path, out: &Path, config: &ToolConfig) -> Result<Outcome> {
    config.validate()?;
    let manifest = load_manifest(manifest_path)?;
    let src_base = base_dir(manifest_path);
    ensure_dir(out)?;
    let results: Vec<std::result::Result<(AudioClip, EnhancementReport), String>> = manifest
        .entries()
        .par_iter()
        .map(|e| {
            let clip = load_clip(&e.path, config.audio.sample_rate).map_err(|err| err.to_string())?;
            enhance_with_report(&clip, &config.audio, None).map_err(|err| err.to_string())
        })
        .collect();
    let mut outcome = Outcome::default();
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for (i, (entry, result)) in manifest.entries().iter().zip(results).enumerate() {
        let source = relative(&entry.path, &src_base);
        match result {
            Ok((clip, report)) => {
                let path = out.join(audio_name(i));
                write_wav_atomic(&clip, &path)?;
                entries.push(ManifestEntry {
                    path: path.clone(),
                    ..entry.clone()
                });
                reports.push((source, relative(&path, out), report));
                outcome.written.push(path);
            }
            Err(reason) => outcome.failures.push(ItemFailure { path: source, reason }),
        }
    }
    let prepared = DatasetManifest::from_entries(entries)?;
    outcome.written.push(write_manifest(&prepared, out)?);
    let log = CommandLog {
        command: "prepare",
        config_fingerprint: config.fingerprint(),
        items: reports
            .iter()
            .map(|(source, output, report)| PrepareRecord {
                source: source.clone(),
                output: output.clone(),
                report,
            })
            .collect(),
        failures: outcome.failures.clone(),
    };
    let log_path = out.join("prepare.json");
    write_json(&log_path, &log)?;
    outcome.written.push(log_path);
    Ok(outcome)
}

#[derive(Serialize)]
struct AugmentRecord {
    output: String,
    speaker: String,
    word: String,
    take: u32,
    augmented: bool,
}

/// Copies originals through and adds one pitch-shifted clone per clip and
/// semitone value. Existing clones in the input are regenerated, never
/// cloned.
pub fn cmd_augment(manifest_path: &Path, out: &Path, semitones: &[f64], config: &ToolConfig) -> Result<Outcome> {
    config.validate()?;
    let manifest = load_manifest(manifest_path)?;
    let src_base = base_dir(manifest_path);
    ensure_dir(out)?;
    let originals: Vec<&ManifestEntry> = manifest.entries().iter().filter(|e| !e.augmented).collect();
    let loaded: Vec<std::result::Result<AudioClip, String>> = originals
        .par_iter()
        .map(|e| read_wav(&e.path).map_err(|err| err.to_string()))
        .collect();
    let mut outcome = Outcome::default();
    let mut entries = Vec::new();
    let mut clips = Vec::new();
    for (entry, result) in originals.iter().zip(loaded) {
        match result {
            Ok(clip) => {
                entries.push(ManifestEntry {
                    path: out.join(audio_name(entries.len())),
                    ..(*entry).clone()
                });
                clips.push(clip);
            }
            Err(reason) => outcome.failures.push(ItemFailure {
                path: relative(&entry.path, &src_base),
                reason,
            }),
        }
    }
    let (augmented, aug_clips) = augment_corpus(&DatasetManifest::from_entries(entries)?, &clips, semitones)?;
    for (entry, clip) in augmented.entries().iter().zip(&aug_clips) {
        write_wav_atomic(clip, &entry.path)?;
        outcome.written.push(entry.path.clone());
    }
    outcome.written.push(write_manifest(&augmented, out)?);
    let log = CommandLog {
        command: "augment",
        config_fingerprint: config.fingerprint(),
        items: augmented
            .entries()
            .iter()
            .map(|e| AugmentRecord {
                output: relative(&e.path, out),
                speaker: e.speaker.clone(),
                word: e.word.clone(),
                take: e.take,
                augmented: e.augmented,
            })
            .collect(),
        failures: outcome.failures.clone(),
    };
    let log_path = out.join("augment.json");
    write_json(&log_path, &log)?;
    outcome.written.push(log_path);
    Ok(outcome)
}

/// Index written next to featurized manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureIndex {
    pub format: String,
    pub feature_fingerprint: String,
    pub config_fingerprint: String,
    pub entries: usize,
    pub dims: usize,
    pub sample_rate: u32,
    pub failures: Vec<ItemFailure>,
}

/// MFCCs of every clip, as `features/NNNNN.pdf1` plus a manifest pointing at
/// them and `features.json` carrying the feature fingerprint.
pub fn cmd_featurize(manifest_path: &Path, out: &Path, config: &ToolConfig) -> Result<Outcome> {
    config.validate()?;
    let manifest = load_manifest(manifest_path)?;
    let src_base = base_dir(manifest_path);
    ensure_dir(out)?;
    let sr = config.audio.sample_rate;
    let extractor = MfccExtractor::new(&config.features, sr)?;
    let results: Vec<std::result::Result<_, String>> = manifest
        .entries()
        .par_iter()
        .map(|e| {
            let clip = load_clip(&e.path, sr).map_err(|err| err.to_string())?;
            extractor.extract(&clip).map_err(|err| err.to_string())
        })
        .collect();
    let mut outcome = Outcome::default();
    let mut entries = Vec::new();
    for (i, (entry, result)) in manifest.entries().iter().zip(results).enumerate() {
        match result {
            Ok(fm) => {
                let path = out.join("features").join(format!("{i:05}.pdf1"));
                if let Some(dir) = path.parent() {
                    ensure_dir(dir)?;
                }
                let tmp = temp_path(&path);
                write_features(&fm, &tmp)?;
                std::fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
                entries.push(ManifestEntry {
                    path: path.clone(),
                    ..entry.clone()
                });
                outcome.written.push(path);
            }
            Err(reason) => outcome.failures.push(ItemFailure {
                path: relative(&entry.path, &src_base),
                reason,
            }),
        }
    }
    let featurized = DatasetManifest::from_entries(entries)?;
    outcome.written.push(write_manifest(&featurized, out)?);
    let index = FeatureIndex {
        format: FEATURE_INDEX_FORMAT.into(),
        feature_fingerprint: config.features_fingerprint(),
        config_fingerprint: config.fingerprint(),
        entries: featurized.len(),
        dims: config.features.n_ceps,
        sample_rate: sr,
        failures: outcome.failures.clone(),
    };
    let index_path = out.join(FEATURE_INDEX_FILE);
    write_json(&index_path, &index)?;
    outcome.written.push(index_path);
    Ok(outcome)
}

/// Loads a featurized manifest and checks that its features were computed
/// with the settings in `config`.
pub fn load_feature_set(manifest_path: &Path, config: &ToolConfig) -> Result<(FeatureSet, FeatureIndex)> {
    let index_path = base_dir(manifest_path).join(FEATURE_INDEX_FILE);
    let index: FeatureIndex =
        serde_json::from_str(&read_text(&index_path)?).map_err(|e| WorkflowError::Format(format!("{}: {e}", index_path.display())))?;
    if index.format != FEATURE_INDEX_FORMAT {
        return Err(WorkflowError::Format(format!("{} is not a feature index", index_path.display())));
    }
    let expected = config.features_fingerprint();
    if index.feature_fingerprint != expected {
        return Err(WorkflowError::Fingerprint {
            what: "feature".into(),
            expected,
            found: index.feature_fingerprint,
        });
    }
    let set = FeatureSet::from_feature_files(load_manifest(manifest_path)?)?;
    Ok((set, index))
}

/// A trained recognizer and how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub provenance: Option<Provenance>,
}

impl ModelFile {
    pub fn to_json(&self) -> Result<String> {
        let mut text = match &self.model {
            TrainedModel::Hmm(c) => c.to_json(self.provenance.as_ref())?,
            TrainedModel::Dnn(m) => m.to_json(self.provenance.as_ref())?,
        };
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Peek {
            format: String,
        }
        let peek: Peek = serde_json::from_str(text).map_err(|e| WorkflowError::Format(e.to_string()))?;
        match peek.format.as_str() {
            crate::hmm::HMM_FORMAT => {
                let (c, provenance) = WordClassifier::from_json(text)?;
                Ok(Self {
                    model: TrainedModel::Hmm(c),
                    provenance,
                })
            }
            crate::dnn::DNN_FORMAT => {
                let (m, provenance) = MlpModel::from_json(text)?;
                Ok(Self {
                    model: TrainedModel::Dnn(m),
                    provenance,
                })
            }
            other => Err(WorkflowError::Format(format!("unknown model format {other:?}"))),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?)
    }
}

/// Options shared by `train` and `eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub classifier: ClassifierKind,
    pub mode: SplitMode,
    pub augment: bool,
    pub seeds: Vec<u64>,
}

/// Trains one model on the training side of the split for the first seed
/// and writes `model.json` with its provenance.
pub fn cmd_train(manifest_path: &Path, out: &Path, opts: &RunOptions, config: &ToolConfig) -> Result<Outcome> {
    config.validate()?;
    let (set, index) = load_feature_set(manifest_path, config)?;
    let seed = *opts
        .seeds
        .first()
        .ok_or_else(|| WorkflowError::Format("at least one seed is required".into()))?;
    let plan = make_split(set.manifest(), opts.mode, &config.split, seed)?;
    let mut train = plan.train.clone();
    if opts.augment {
        train.extend(&plan.augmented);
    }
    let model = TrainedModel::train(opts.classifier, &set.labeled(&train), config, seed)?;
    let file = ModelFile {
        model,
        provenance: Some(Provenance {
            config_fingerprint: config.fingerprint(),
            feature_fingerprint: index.feature_fingerprint,
            split: Some(plan.summary()),
        }),
    };
    let path = out.join("model.json");
    write_atomic(&path, file.to_json()?.as_bytes())?;
    Ok(Outcome {
        written: vec![path],
        failures: Vec::new(),
    })
}

fn mode_from_name(name: &str) -> Result<SplitMode> {
    match name {
        "speaker-independent" => Ok(SplitMode::SpeakerIndependent),
        "speaker-dependent" => Ok(SplitMode::SpeakerDependent),
        other => Err(WorkflowError::Format(format!("unknown split mode {other:?}"))),
    }
}

fn write_eval_report(out: &Path, report: &EvalReport) -> Result<Vec<PathBuf>> {
    let json_path = out.join("report.json");
    write_json(&json_path, report)?;
    let mut text = emit_report(&[ReportRow::from(report)]).text;
    text.push('\n');
    for run in &report.runs {
        text.push_str(&format!(
            "seed {}: {}/{} correct ({:.2} %), {} training utterances\n",
            run.seed, run.correct, run.n_test, run.accuracy, run.n_train
        ));
    }
    let text_path = out.join("report.txt");
    write_atomic(&text_path, text.as_bytes())?;
    Ok(vec![json_path, text_path])
}

/// Without a model: runs the full experiment, one split and run per seed.
/// With a model: scores it on the test side of the split it was trained
/// with, after checking that model, features and config agree.
pub fn cmd_eval(
    manifest_path: &Path,
    out: &Path,
    model_path: Option<&Path>,
    opts: &RunOptions,
    config: &ToolConfig,
) -> Result<Outcome> {
    config.validate()?;
    let (set, index) = load_feature_set(manifest_path, config)?;
    let report = match model_path {
        None => run_experiment(
            &set,
            &ExperimentSpec {
                classifier: opts.classifier,
                mode: opts.mode,
                augment: opts.augment,
                params: config.split.clone(),
                seeds: opts.seeds.clone(),
            },
            config,
        )?,
        Some(path) => {
            let file = ModelFile::load(path)?;
            let prov = file
                .provenance
                .ok_or_else(|| WorkflowError::Format(format!("{} has no provenance", path.display())))?;
            if prov.feature_fingerprint != index.feature_fingerprint {
                return Err(WorkflowError::Fingerprint {
                    what: "model feature".into(),
                    expected: index.feature_fingerprint,
                    found: prov.feature_fingerprint,
                });
            }
            if prov.config_fingerprint != config.fingerprint() {
                return Err(WorkflowError::Fingerprint {
                    what: "model config".into(),
                    expected: config.fingerprint(),
                    found: prov.config_fingerprint,
                });
            }
            let split = prov
                .split
                .ok_or_else(|| WorkflowError::Format(format!("{} records no split", path.display())))?;
            let mode = mode_from_name(&split.mode)?;
            let plan = make_split(set.manifest(), mode, &config.split, split.seed)?;
            let (correct, confusion) = file.model.evaluate(&set, &plan.test)?;
            let accuracy = 100.0 * correct as f64 / plan.test.len().max(1) as f64;
            EvalReport {
                classifier: file.model.kind(),
                mode,
                augmented: opts.augment,
                runs: vec![RunResult {
                    seed: split.seed,
                    accuracy,
                    n_train: split.n_train,
                    n_test: plan.test.len(),
                    correct,
                    confusion,
                }],
                mean_accuracy: accuracy,
                config_fingerprint: config.fingerprint(),
            }
        }
    };
    Ok(Outcome {
        written: write_eval_report(out, &report)?,
        failures: Vec::new(),
    })
}

/// Accuracy per utterance level, as `sweep.json` and `sweep.txt`.
pub fn cmd_sweep(
    manifest_path: &Path,
    out: &Path,
    classifier: ClassifierKind,
    mode: SweepMode,
    levels: &[SweepLevel],
    seeds: &[u64],
    config: &ToolConfig,
) -> Result<Outcome> {
    config.validate()?;
    let (set, _) = load_feature_set(manifest_path, config)?;
    let report = utterance_sweep(&set, classifier, mode, levels, seeds, config)?;
    let json_path = out.join("sweep.json");
    write_json(&json_path, &report)?;
    let text_path = out.join("sweep.txt");
    write_atomic(&text_path, format_sweep(&report).as_bytes())?;
    Ok(Outcome {
        written: vec![json_path, text_path],
        failures: Vec::new(),
    })
}

/// Combines saved evaluation reports into one accuracy table with
/// augmentation deltas (`table.json`, `table.txt`).
pub fn cmd_report(reports: &[PathBuf], out: &Path) -> Result<Outcome> {
    let rows = reports
        .iter()
        .map(|p| {
            let r: EvalReport = serde_json::from_str(&read_text(p)?)
                .map_err(|e| WorkflowError::Format(format!("{}: {e}", p.display())))?;
            Ok(ReportRow::from(&r))
        })
        .collect::<Result<Vec<_>>>()?;
    write_table(&rows, out)
}

/// Writes the table for rows given directly, such as published values.
pub fn write_table(rows: &[ReportRow], out: &Path) -> Result<Outcome> {
    let bundle = emit_report(rows);
    let json_path = out.join("table.json");
    write_atomic(&json_path, format!("{}\n", bundle.json).as_bytes())?;
    let text_path = out.join("table.txt");
    write_atomic(&text_path, bundle.text.as_bytes())?;
    Ok(Outcome {
        written: vec![json_path, text_path],
        failures: Vec::new(),
    })
}

/// Writes a synthetic corpus as WAV files plus a manifest.
pub fn cmd_synth(spec: &SynthSpec, out: &Path) -> Result<Outcome> {
    let (manifest, clips) = generate(spec, out.join("audio"));
    let mut outcome = Outcome::default();
    for (entry, clip) in manifest.entries().iter().zip(&clips) {
        write_wav_atomic(clip, &entry.path)?;
        outcome.written.push(entry.path.clone());
    }
    outcome.written.push(write_manifest(&manifest, out)?);
    Ok(outcome)
}
