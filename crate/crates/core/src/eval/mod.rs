//! Manifests, deterministic splits, experiments, sweeps and reports.

mod augment;
mod corpus;
mod experiment;
mod manifest;
pub mod reference;
mod report;
mod split;
mod sweep;

pub use augment::{augment_corpus, augmented_take, source_take, AUGMENT_TAKE_STRIDE};
pub use corpus::FeatureSet;
pub use experiment::{
    run_experiment, run_single, ClassifierKind, Confusion, EvalReport, ExperimentSpec, RunResult,
    TrainedModel,
};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use report::{augmentation_deltas, emit_report, format_sweep, AugmentationDelta, ReportBundle, ReportRow};
pub use split::{make_split, SplitMode, SplitParams, SplitPlan};
pub use sweep::{parse_levels, utterance_sweep, SweepLevel, SweepMode, SweepReport, SweepRow, TABLE_II_LEVELS};

use std::path::PathBuf;

use thiserror::Error;

use crate::audio::AudioError;
use crate::dnn::DnnError;
use crate::features::FeatureError;
use crate::hmm::HmmError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("manifest {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("manifest line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("duplicate entry ({speaker}, {word}, take {take}) on lines {first} and {second}")]
    Duplicate {
        speaker: String,
        word: String,
        take: u32,
        first: u64,
        second: u64,
    },
    #[error("manifest line {line}: missing file {path}")]
    MissingFile { line: u64, path: PathBuf },
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),
    #[error("invalid sweep level: {0}")]
    InvalidLevel(String),
    #[error("features: {0}")]
    Features(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Hmm(#[from] HmmError),
    #[error(transparent)]
    Dnn(#[from] DnnError),
}

pub type Result<T> = std::result::Result<T, EvalError>;
