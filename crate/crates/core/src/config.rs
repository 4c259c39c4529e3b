//! The single tool configuration and the fingerprints that tie artifacts to it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audio::{EnhancementSettings, MAX_SEMITONES};
use crate::dnn::DnnSettings;
use crate::eval::SplitParams;
use crate::features::FeatureSettings;
use crate::hmm::HmmSettings;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Io { path: PathBuf, reason: String },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationSettings {
    /// One pitch-shifted clone per training clip and entry.
    pub semitones: Vec<f64>,
}

impl Default for AugmentationSettings {
    fn default() -> Self {
        Self {
            semitones: vec![-2.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub audio: EnhancementSettings,
    pub features: FeatureSettings,
    pub hmm: HmmSettings,
    pub dnn: DnnSettings,
    pub augmentation: AugmentationSettings,
    pub split: SplitParams,
    /// One experiment run per seed.
    pub seeds: Vec<u64>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        Self {
            audio: EnhancementSettings::default(),
            features: FeatureSettings::default(),
            hmm: HmmSettings::default(),
            dnn: DnnSettings::default(),
            augmentation: AugmentationSettings::default(),
            split: SplitParams::default(),
            seeds: vec![1, 2, 3],
        }
    }
}

impl ToolConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |e: &dyn std::fmt::Display| ConfigError::Invalid(e.to_string());
        self.audio.validate().map_err(|e| invalid(&e))?;
        self.features.validate().map_err(|e| invalid(&e))?;
        self.hmm.validate().map_err(|e| invalid(&e))?;
        self.dnn.validate().map_err(|e| invalid(&e))?;
        self.split.validate().map_err(|e| invalid(&e))?;
        for s in &self.augmentation.semitones {
            if !s.is_finite() || s.abs() > MAX_SEMITONES || *s == 0.0 {
                return Err(ConfigError::Invalid(format!(
                    "augmentation semitone {s} must be non-zero and within ±{MAX_SEMITONES}"
                )));
            }
        }
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("seeds must not be empty".into()));
        }
        Ok(())
    }

    /// Hash of every setting.
    pub fn fingerprint(&self) -> String {
        digest(&serde_json::to_value(self).expect("config serializes"))
    }

    /// Hash of the settings that determine feature files: enhancement,
    /// feature extraction and augmentation.
    pub fn features_fingerprint(&self) -> String {
        let part = serde_json::json!({
            "audio": self.audio,
            "features": self.features,
            "augmentation": self.augmentation,
        });
        digest(&part)
    }
}

/// SHA-256 of the compact JSON rendering. `serde_json::Value` objects keep
/// keys sorted, so equal values always hash equally.
fn digest(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// How a trained model was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub config_fingerprint: String,
    pub feature_fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSummary {
    pub mode: String,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = ToolConfig::default();
        cfg.validate().unwrap();
        let back = ToolConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.fingerprint(), cfg.fingerprint());
    }

    #[test]
    fn partial_documents_take_defaults() {
        let cfg = ToolConfig::from_json(r#"{"dnn": {"epochs": 5}}"#).unwrap();
        assert_eq!(cfg.dnn.epochs, 5);
        assert_eq!(cfg.hmm, HmmSettings::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ToolConfig::from_json(r#"{"hmm": {"n_state": 3}}"#).is_err());
        assert!(ToolConfig::from_json(r#"{"extra": 1}"#).is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(ToolConfig::from_json(r#"{"features": {"fft_size": 100}}"#).is_err());
        assert!(ToolConfig::from_json(r#"{"augmentation": {"semitones": [13]}}"#).is_err());
        assert!(ToolConfig::from_json(r#"{"seeds": []}"#).is_err());
    }

    #[test]
    fn fingerprints_track_their_sections() {
        let base = ToolConfig::default();
        let mut hmm = base.clone();
        hmm.hmm.n_states = 4;
        assert_ne!(hmm.fingerprint(), base.fingerprint());
        assert_eq!(hmm.features_fingerprint(), base.features_fingerprint());

        let mut feat = base.clone();
        feat.features.n_filters = 24;
        assert_ne!(feat.fingerprint(), base.fingerprint());
        assert_ne!(feat.features_fingerprint(), base.features_fingerprint());

        let mut seeds = base.clone();
        seeds.seeds = vec![4];
        assert_ne!(seeds.fingerprint(), base.fingerprint());
        assert_eq!(base.fingerprint().len(), 64);
    }
}
