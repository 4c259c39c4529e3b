//! JSON model files. Log probabilities of structural zeros are written as
//! the string `"-inf"`.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use super::{GaussianMixture, HmmError, Result, WordClassifier, WordHmm};
use crate::config::Provenance;

pub const HMM_FORMAT: &str = "isoword-hmm";
pub const HMM_FORMAT_VERSION: u32 = 1;

/// A log probability that serializes `-inf` as a string.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LogProb(f64);

impl Serialize for LogProb {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            Err(serde::ser::Error::custom(format!("cannot store log probability {}", self.0)))
        }
    }
}

impl<'de> Deserialize<'de> for LogProb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(LogProb(v)),
            Raw::Text(t) if t == "-inf" => Ok(LogProb(f64::NEG_INFINITY)),
            Raw::Text(t) => Err(de::Error::custom(format!("unexpected log probability {t:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WordEntry {
    label: String,
    n_states: usize,
    log_start: Vec<LogProb>,
    log_trans: Vec<Vec<LogProb>>,
    emissions: Vec<GaussianMixture>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HmmFile {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    vocabulary: Vec<String>,
    models: Vec<WordEntry>,
}

fn unwrap_probs(v: Vec<LogProb>) -> Vec<f64> {
    v.into_iter().map(|l| l.0).collect()
}

impl WordClassifier {
    pub fn to_json(&self, provenance: Option<&Provenance>) -> Result<String> {
        let file = HmmFile {
            format: HMM_FORMAT.into(),
            version: HMM_FORMAT_VERSION,
            provenance: provenance.cloned(),
            vocabulary: self.vocabulary().map(String::from).collect(),
            models: self
                .models()
                .map(|m| WordEntry {
                    label: m.label().to_string(),
                    n_states: m.n_states(),
                    log_start: m.log_start().iter().map(|l| LogProb(*l)).collect(),
                    log_trans: m
                        .log_trans()
                        .iter()
                        .map(|row| row.iter().map(|l| LogProb(*l)).collect())
                        .collect(),
                    emissions: m.emissions().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| HmmError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<(Self, Option<Provenance>)> {
        let file: HmmFile = serde_json::from_str(text).map_err(|e| HmmError::Format(e.to_string()))?;
        if file.format != HMM_FORMAT || file.version != HMM_FORMAT_VERSION {
            return Err(HmmError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        let models = file
            .models
            .into_iter()
            .map(|w| {
                if w.log_start.len() != w.n_states {
                    return Err(HmmError::Format(format!("word {} state count mismatch", w.label)));
                }
                WordHmm::new(
                    w.label,
                    unwrap_probs(w.log_start),
                    w.log_trans.into_iter().map(unwrap_probs).collect(),
                    w.emissions,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let clf = WordClassifier::new(models)?;
        let vocab: Vec<&str> = clf.vocabulary().collect();
        if vocab != file.vocabulary.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(HmmError::Format("vocabulary does not match the stored models".into()));
        }
        Ok((clf, file.provenance))
    }
}
