use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::augment::source_take;
use super::{DatasetManifest, EvalError, Result};
use crate::config::SplitSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Test speakers never appear in training.
    SpeakerIndependent,
    /// Every speaker contributes held-out takes; models are per speaker.
    SpeakerDependent,
}

impl fmt::Display for SplitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitMode::SpeakerIndependent => "speaker-independent",
            SplitMode::SpeakerDependent => "speaker-dependent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitParams {
    /// Train side of the speaker ratio; scaled to the speakers present.
    pub train_speakers: usize,
    /// Test side of the speaker ratio.
    pub test_speakers: usize,
    /// Held-out takes per speaker and word.
    pub test_takes: usize,
    /// Training takes per speaker and word; all remaining takes when absent.
    pub train_takes: Option<usize>,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            train_speakers: 25,
            test_speakers: 10,
            test_takes: 1,
            train_takes: None,
        }
    }
}

impl SplitParams {
    pub fn validate(&self) -> Result<()> {
        if self.train_speakers == 0 || self.test_speakers == 0 {
            return Err(EvalError::InfeasibleSplit("speaker ratio terms must be >= 1".into()));
        }
        if self.test_takes == 0 || self.train_takes == Some(0) {
            return Err(EvalError::InfeasibleSplit("take counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// Disjoint train and test entry indices into a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub mode: SplitMode,
    pub seed: u64,
    /// Original entries used for training, ascending.
    pub train: Vec<usize>,
    /// Original entries held out, ascending.
    pub test: Vec<usize>,
    /// Augmented clones whose sources are in `train`, ascending.
    pub augmented: Vec<usize>,
}

impl SplitPlan {
    pub fn summary(&self) -> SplitSummary {
        SplitSummary {
            mode: self.mode.to_string(),
            seed: self.seed,
            n_train: self.train.len(),
            n_test: self.test.len(),
        }
    }
}

/// Partitions the original entries of `manifest`. The result depends only on
/// the manifest, mode, parameters and seed.
pub fn make_split(
    manifest: &DatasetManifest,
    mode: SplitMode,
    params: &SplitParams,
    seed: u64,
) -> Result<SplitPlan> {
    params.validate()?;
    let entries = manifest.entries();
    let originals: Vec<usize> = (0..entries.len()).filter(|&i| !entries[i].augmented).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    match mode {
        SplitMode::SpeakerIndependent => {
            let speakers: BTreeSet<&str> = originals.iter().map(|&i| entries[i].speaker.as_str()).collect();
            let mut speakers: Vec<&str> = speakers.into_iter().collect();
            let n = speakers.len();
            if n < 2 {
                return Err(EvalError::InfeasibleSplit(format!(
                    "speaker-independent split needs at least 2 speakers, found {n}"
                )));
            }
            let ratio_total = params.train_speakers + params.test_speakers;
            let n_test = ((n * params.test_speakers) as f64 / ratio_total as f64).round() as usize;
            let n_test = n_test.clamp(1, n - 1);
            speakers.shuffle(&mut rng);
            let test_speakers: BTreeSet<&str> = speakers[n - n_test..].iter().copied().collect();
            for &i in &originals {
                if test_speakers.contains(entries[i].speaker.as_str()) {
                    test.push(i);
                } else {
                    train.push(i);
                }
            }
        }
        SplitMode::SpeakerDependent => {
            let mut groups: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
            for &i in &originals {
                groups
                    .entry((&entries[i].speaker, &entries[i].word))
                    .or_default()
                    .push(i);
            }
            let need = params.test_takes + params.train_takes.unwrap_or(1);
            for ((speaker, word), mut idx) in groups {
                if idx.len() < need {
                    return Err(EvalError::InfeasibleSplit(format!(
                        "speaker {speaker} has {} takes of {word}, need {need}",
                        idx.len()
                    )));
                }
                idx.sort_by_key(|&i| entries[i].take);
                idx.shuffle(&mut rng);
                test.extend(&idx[..params.test_takes]);
                let rest = &idx[params.test_takes..];
                let n_train = params.train_takes.unwrap_or(rest.len());
                train.extend(&rest[..n_train]);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    let train_keys: BTreeSet<(&str, &str, u32)> = train.iter().map(|&i| entries[i].key()).collect();
    let augmented = (0..entries.len())
        .filter(|&i| {
            let e = &entries[i];
            e.augmented && train_keys.contains(&(e.speaker.as_str(), e.word.as_str(), source_take(e.take)))
        })
        .collect();
    Ok(SplitPlan {
        mode,
        seed,
        train,
        test,
        augmented,
    })
}
