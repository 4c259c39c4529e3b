use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_split, EvalError, FeatureSet, Result, SplitMode, SplitParams, SplitPlan};
use crate::config::ToolConfig;
use crate::dnn::{predict, train_dnn, MlpModel};
use crate::features::FeatureMatrix;
use crate::hmm::{train_classifier, WordClassifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "HMM-GMM")]
    Hmm,
    #[serde(rename = "DNN")]
    Dnn,
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassifierKind::Hmm => "HMM-GMM",
            ClassifierKind::Dnn => "DNN",
        })
    }
}

/// Either kind of trained recognizer.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Hmm(WordClassifier),
    Dnn(MlpModel),
}

impl TrainedModel {
    /// Trains on `(word, features)` pairs. The vocabulary is the set of words
    /// seen; `seed` drives DNN initialization and shuffling.
    pub fn train(
        kind: ClassifierKind,
        examples: &[(&str, &FeatureMatrix)],
        config: &ToolConfig,
        seed: u64,
    ) -> Result<Self> {
        let vocab: BTreeSet<&str> = examples.iter().map(|(w, _)| *w).collect();
        let vocab: Vec<String> = vocab.into_iter().map(String::from).collect();
        Ok(match kind {
            ClassifierKind::Hmm => TrainedModel::Hmm(train_classifier(examples, &vocab, &config.hmm)?.0),
            ClassifierKind::Dnn => TrainedModel::Dnn(train_dnn(examples, &vocab, &config.dnn, seed)?.0),
        })
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedModel::Hmm(_) => ClassifierKind::Hmm,
            TrainedModel::Dnn(_) => ClassifierKind::Dnn,
        }
    }

    pub fn predict(&self, fm: &FeatureMatrix) -> Result<String> {
        Ok(match self {
            TrainedModel::Hmm(c) => c.classify(fm)?.label,
            TrainedModel::Dnn(m) => predict(m, fm)?.label,
        })
    }

    /// Scores the entries at `indices`; returns the number correct and the
    /// confusion counts.
    pub fn evaluate(&self, set: &FeatureSet, indices: &[usize]) -> Result<(usize, Confusion)> {
        let predicted = indices
            .par_iter()
            .map(|&i| self.predict(set.get(i)))
            .collect::<Result<Vec<_>>>()?;
        let mut confusion = Confusion::new();
        let mut correct = 0;
        for (&i, guess) in indices.iter().zip(predicted) {
            let truth = &set.manifest().entries()[i].word;
            if *truth == guess {
                correct += 1;
            }
            *confusion.entry(truth.clone()).or_default().entry(guess).or_default() += 1;
        }
        Ok((correct, confusion))
    }
}

/// `confusion[true word][predicted word]` = count.
pub type Confusion = BTreeMap<String, BTreeMap<String, usize>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    /// Percentage of test utterances recognized correctly.
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub confusion: Confusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classifier: ClassifierKind,
    pub mode: SplitMode,
    pub augmented: bool,
    pub runs: Vec<RunResult>,
    /// Arithmetic mean of the per-run accuracies.
    pub mean_accuracy: f64,
    pub config_fingerprint: String,
}

/// One experiment: a classifier, a split protocol, whether to add the
/// augmented clones to training, and one run per seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub classifier: ClassifierKind,
    pub mode: SplitMode,
    pub augment: bool,
    pub params: SplitParams,
    pub seeds: Vec<u64>,
}

fn merge(into: &mut Confusion, from: Confusion) {
    for (truth, row) in from {
        let dst = into.entry(truth).or_default();
        for (guess, n) in row {
            *dst.entry(guess).or_default() += n;
        }
    }
}

/// Trains on one split and scores its test side. Speaker-dependent plans
/// train a separate model per speaker and pool the counts.
pub fn run_single(
    set: &FeatureSet,
    plan: &SplitPlan,
    classifier: ClassifierKind,
    augment: bool,
    config: &ToolConfig,
) -> Result<RunResult> {
    if plan.test.is_empty() {
        return Err(EvalError::InfeasibleSplit("split has no test entries".into()));
    }
    let entries = set.manifest().entries();
    let mut train = plan.train.clone();
    if augment {
        train.extend(&plan.augmented);
    }
    let groups: Vec<(Vec<usize>, Vec<usize>, u64)> = match plan.mode {
        SplitMode::SpeakerIndependent => vec![(train.clone(), plan.test.clone(), plan.seed)],
        SplitMode::SpeakerDependent => {
            let mut by_speaker: BTreeMap<&str, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
            for &i in &train {
                by_speaker.entry(&entries[i].speaker).or_default().0.push(i);
            }
            for &i in &plan.test {
                by_speaker.entry(&entries[i].speaker).or_default().1.push(i);
            }
            by_speaker
                .into_iter()
                .enumerate()
                .map(|(k, (speaker, (tr, te)))| {
                    if tr.is_empty() {
                        Err(EvalError::InfeasibleSplit(format!("speaker {speaker} has no training takes")))
                    } else {
                        Ok((tr, te, plan.seed.wrapping_mul(1_000_003).wrapping_add(k as u64)))
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    let scored = groups
        .par_iter()
        .map(|(tr, te, seed)| {
            let model = TrainedModel::train(classifier, &set.labeled(tr), config, *seed)?;
            model.evaluate(set, te)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut correct = 0;
    let mut confusion = Confusion::new();
    for (c, conf) in scored {
        correct += c;
        merge(&mut confusion, conf);
    }
    let n_test = plan.test.len();
    Ok(RunResult {
        seed: plan.seed,
        accuracy: 100.0 * correct as f64 / n_test as f64,
        n_train: train.len(),
        n_test,
        correct,
        confusion,
    })
}

/// One split and run per seed, averaged.
pub fn run_experiment(set: &FeatureSet, spec: &ExperimentSpec, config: &ToolConfig) -> Result<EvalReport> {
    if spec.seeds.is_empty() {
        return Err(EvalError::InfeasibleSplit("at least one seed is required".into()));
    }
    let runs = spec
        .seeds
        .par_iter()
        .map(|&seed| {
            let plan = make_split(set.manifest(), spec.mode, &spec.params, seed)?;
            run_single(set, &plan, spec.classifier, spec.augment, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_accuracy = runs.iter().map(|r| r.accuracy).sum::<f64>() / runs.len() as f64;
    Ok(EvalReport {
        classifier: spec.classifier,
        mode: spec.mode,
        augmented: spec.augment,
        runs,
        mean_accuracy,
        config_fingerprint: config.fingerprint(),
    })
}
