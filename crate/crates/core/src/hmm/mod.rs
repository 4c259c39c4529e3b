//! Whole-word hidden Markov models with Gaussian-mixture emissions.
//!
//! Each vocabulary word gets its own left-to-right [`WordHmm`], trained with
//! Baum-Welch on that word's MFCC sequences. A [`WordClassifier`] labels an
//! utterance with the word whose model assigns it the highest forward
//! likelihood. All probability arithmetic happens in log space.

mod classifier;
mod gmm;
mod io;
mod model;
mod train;

pub use classifier::{train_classifier, Classification, WordClassifier};
pub use gmm::GaussianMixture;
pub use io::{HMM_FORMAT, HMM_FORMAT_VERSION};
pub use model::{ViterbiPath, WordHmm};
pub use train::{train_word_hmm, HmmSettings, TrainingTrace};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HmmError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid HMM settings: {0}")]
    InvalidSettings(String),
    #[error("observation sequence is empty")]
    EmptySequence,
    #[error("expected {expected}-dimensional observations, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no state path can produce the observation sequence")]
    Infeasible,
    #[error("no training sequences for word {0:?}")]
    NoTrainingData(String),
    #[error("word {0:?} is not in the vocabulary")]
    UnknownWord(String),
    #[error("training sequence for {label:?} has {frames} frames, fewer than {states} states")]
    SequenceTooShort {
        label: String,
        frames: usize,
        states: usize,
    },
    #[error("model file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, HmmError>;
