use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_word_hmm, HmmError, HmmSettings, Result, TrainingTrace, WordHmm};
use crate::features::FeatureMatrix;

/// One model per vocabulary word, kept in lexicographic label order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordClassifier {
    models: BTreeMap<String, WordHmm>,
}

/// Classifier decision with the full score vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: String,
    /// `(word, ln P(O | word model))` in lexicographic word order.
    pub scores: Vec<(String, f64)>,
}

impl WordClassifier {
    pub fn new(models: impl IntoIterator<Item = WordHmm>) -> Result<Self> {
        let models: BTreeMap<String, WordHmm> = models
            .into_iter()
            .map(|m| (m.label().to_string(), m))
            .collect();
        let Some(first) = models.values().next() else {
            return Err(HmmError::InvalidModel("classifier needs at least one word".into()));
        };
        let dims = first.dims();
        if let Some(bad) = models.values().find(|m| m.dims() != dims) {
            return Err(HmmError::DimensionMismatch {
                expected: dims,
                got: bad.dims(),
            });
        }
        Ok(Self { models })
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }

    pub fn models(&self) -> impl Iterator<Item = &WordHmm> {
        self.models.values()
    }

    pub fn model(&self, label: &str) -> Option<&WordHmm> {
        self.models.get(label)
    }

    pub fn dims(&self) -> usize {
        self.models.values().next().map_or(0, WordHmm::dims)
    }

    /// Scores `obs` under every word model with the forward algorithm and
    /// picks the best; ties go to the lexicographically first word.
    pub fn classify(&self, obs: &FeatureMatrix) -> Result<Classification> {
        let scores = self
            .models
            .iter()
            .map(|(label, model)| Ok((label.clone(), model.forward_log_likelihood(obs)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (i, (_, s)) in scores.iter().enumerate() {
            if *s > scores[best].1 {
                best = i;
            }
        }
        Ok(Classification {
            label: scores[best].0.clone(),
            scores,
        })
    }
}

/// Trains one model per word in `vocabulary` on the examples carrying that
/// label. Words train independently, in parallel.
pub fn train_classifier(
    examples: &[(&str, &FeatureMatrix)],
    vocabulary: &[String],
    settings: &HmmSettings,
) -> Result<(WordClassifier, BTreeMap<String, TrainingTrace>)> {
    settings.validate()?;
    let mut by_word: BTreeMap<&str, Vec<&FeatureMatrix>> =
        vocabulary.iter().map(|w| (w.as_str(), Vec::new())).collect();
    for (label, fm) in examples {
        match by_word.get_mut(label) {
            Some(list) => list.push(fm),
            None => return Err(HmmError::UnknownWord(label.to_string())),
        }
    }
    if let Some((word, _)) = by_word.iter().find(|(_, seqs)| seqs.is_empty()) {
        return Err(HmmError::NoTrainingData(word.to_string()));
    }
    let trained = by_word
        .into_par_iter()
        .map(|(word, seqs)| train_word_hmm(word, &seqs, settings))
        .collect::<Result<Vec<_>>>()?;
    let mut traces = BTreeMap::new();
    let mut models = Vec::with_capacity(trained.len());
    for (model, trace) in trained {
        traces.insert(model.label().to_string(), trace);
        models.push(model);
    }
    Ok((WordClassifier::new(models)?, traces))
}
