//! Feedforward sigmoid network over fixed-length MFCC inputs.
//!
//! Hidden layers compute `sigmoid(W a + b)`; the output layer emits raw
//! logits that feed a softmax cross-entropy loss. Training uses mini-batch
//! backpropagation with the Adam optimizer.

mod adam;
mod input;
mod io;
mod loss;
mod model;
mod train;

pub use adam::{adam_step, AdamState};
pub use input::{features_to_input, Standardizer};
pub use io::{DNN_FORMAT, DNN_FORMAT_VERSION};
pub use loss::softmax_cross_entropy;
pub use model::{backprop, batch_gradient, forward_pass, predict, ForwardCache, MlpModel, Prediction};
pub use train::{train_dnn, TrainingHistory};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DnnError {
    #[error("input has {got} values, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("label index {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("invalid network: {0}")]
    InvalidModel(String),
    #[error("invalid DNN settings: {0}")]
    InvalidSettings(String),
    #[error("no training examples for class {0:?}")]
    NoTrainingData(String),
    #[error("class {0:?} is not in the vocabulary")]
    UnknownClass(String),
    #[error("model file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, DnnError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DnnSettings {
    /// Widths of the sigmoid hidden layers.
    pub hidden: Vec<usize>,
    /// Frames per utterance after center-crop or zero-pad.
    pub target_frames: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for DnnSettings {
    fn default() -> Self {
        Self {
            hidden: vec![256, 128],
            target_frames: 100,
            epochs: 30,
            batch_size: 16,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl DnnSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DnnError::InvalidSettings(m.to_string()));
        if self.hidden.iter().any(|h| !(1..=65_536).contains(h)) {
            return bad("hidden layer widths must lie in [1, 65536]");
        }
        if !(1..=10_000).contains(&self.target_frames) {
            return bad("target_frames must lie in [1, 10000]");
        }
        if self.epochs > 100_000 {
            return bad("epochs must be <= 100000");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and >= 0");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("beta1 and beta2 must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        Ok(())
    }
}
