//! MFCC front end: framing, DFT, periodogram, mel filterbank, log and DCT.

mod io;
mod mel;
mod mfcc;
mod spectrum;

pub use io::{decode_features, encode_features, read_features, read_features_json, write_features, write_features_json, FEATURE_MAGIC};
pub use mel::{build_filterbank, hz_to_mel, mel_to_hz, MelFilterbank};
pub use mfcc::{dct_ortho, frame_signal, mfcc, MfccExtractor};
pub use spectrum::{dft, inverse_dft, periodogram};

pub use rustfft::num_complex::Complex64;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("FFT size {0} must be a positive power of two")]
    InvalidFftSize(usize),
    #[error("frame of {len} samples does not fit an FFT of size {n}")]
    FrameTooLong { len: usize, n: usize },
    #[error("clip of {len} samples is shorter than one {frame}-sample frame")]
    ClipTooShort { len: usize, frame: usize },
    #[error("expected a mono clip, got {0} channels")]
    NotMono(u16),
    #[error("FFT size {fft_size} cannot separate {n_filters} mel filters (repeated bin {bin})")]
    FilterbankTooCoarse {
        fft_size: usize,
        n_filters: usize,
        bin: usize,
    },
    #[error("invalid feature settings: {0}")]
    InvalidSettings(String),
    #[error("invalid feature matrix: {0}")]
    InvalidMatrix(String),
    #[error("feature file {path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, FeatureError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSettings {
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
    pub n_filters: usize,
    pub n_ceps: usize,
    /// Filterbank energies are clamped to at least this before the log.
    pub log_floor: f64,
}

impl Default for FeatureSettings {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
            n_filters: 26,
            n_ceps: 13,
            log_floor: 1e-10,
        }
    }
}

impl FeatureSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FeatureError::InvalidSettings(m));
        if !(self.frame_ms > 0.0 && self.frame_ms <= 1000.0) {
            return bad(format!("frame_ms {} must lie in (0, 1000]", self.frame_ms));
        }
        if !(self.hop_ms > 0.0 && self.hop_ms <= self.frame_ms) {
            return bad(format!("hop_ms {} must lie in (0, frame_ms]", self.hop_ms));
        }
        if self.fft_size == 0 || !self.fft_size.is_power_of_two() {
            return Err(FeatureError::InvalidFftSize(self.fft_size));
        }
        if self.n_filters < 2 {
            return bad("n_filters must be >= 2".into());
        }
        if self.n_ceps == 0 || self.n_ceps > self.n_filters {
            return bad(format!(
                "n_ceps {} must lie in [1, n_filters]",
                self.n_ceps
            ));
        }
        if !(self.log_floor > 0.0) {
            return bad("log_floor must be positive".into());
        }
        Ok(())
    }

    pub fn frame_len(&self, sample_rate: u32) -> usize {
        (self.frame_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn hop_len(&self, sample_rate: u32) -> usize {
        (self.hop_ms * sample_rate as f64 / 1000.0).round() as usize
    }
}

/// A sequence of cepstral frames, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(dims: usize, data: Vec<f64>) -> Result<Self> {
        if dims == 0 {
            return Err(FeatureError::InvalidMatrix("zero dimensions".into()));
        }
        if data.len() % dims != 0 {
            return Err(FeatureError::InvalidMatrix(format!(
                "{} values is not a multiple of {dims}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(FeatureError::InvalidMatrix("non-finite value".into()));
        }
        Ok(Self { dims, data })
    }

    pub fn from_frames(frames: &[Vec<f64>]) -> Result<Self> {
        let dims = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != dims) {
            return Err(FeatureError::InvalidMatrix("ragged frames".into()));
        }
        Self::new(dims, frames.concat())
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn n_frames(&self) -> usize {
        self.data.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn frame(&self, t: usize) -> &[f64] {
        &self.data[t * self.dims..(t + 1) * self.dims]
    }

    pub fn frames(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
