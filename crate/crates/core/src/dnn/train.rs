use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, batch_gradient, AdamState, DnnError, DnnSettings, MlpModel, Result, Standardizer};
use crate::features::FeatureMatrix;

/// Mean training loss of every epoch, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epoch_losses: Vec<f64>,
}

/// Trains a network on labeled feature sequences.
///
/// `vocabulary` fixes the output classes; it is sorted and deduplicated
/// before use. Every class needs at least one example. The same examples,
/// settings and seed always produce the same parameters bit for bit.
pub fn train_dnn(
    examples: &[(&str, &FeatureMatrix)],
    vocabulary: &[String],
    settings: &DnnSettings,
    seed: u64,
) -> Result<(MlpModel, TrainingHistory)> {
    settings.validate()?;
    let mut labels = vocabulary.to_vec();
    labels.sort();
    labels.dedup();
    if labels.is_empty() {
        return Err(DnnError::InvalidSettings("empty vocabulary".into()));
    }
    let mut targets = Vec::with_capacity(examples.len());
    let mut seen = vec![false; labels.len()];
    for (label, _) in examples {
        let idx = labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map_err(|_| DnnError::UnknownClass(label.to_string()))?;
        seen[idx] = true;
        targets.push(idx);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(DnnError::NoTrainingData(labels[missing].clone()));
    }

    let standardizer = Standardizer::fit(examples.iter().map(|(_, fm)| *fm))?;
    let dims = standardizer.mean.len();
    let mut layer_sizes = vec![settings.target_frames * dims];
    layer_sizes.extend(&settings.hidden);
    layer_sizes.push(labels.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MlpModel::init(layer_sizes, labels, settings.target_frames, standardizer, &mut rng)?;
    let inputs = examples
        .iter()
        .map(|(_, fm)| model.input_for(fm))
        .collect::<Result<Vec<_>>>()?;

    let mut adam = AdamState::from_settings(model.params().len(), settings);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut epoch_losses = Vec::with_capacity(settings.epochs);
    for _ in 0..settings.epochs {
        order.shuffle(&mut rng);
        let mut total_loss = 0.0;
        for batch in order.chunks(settings.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| inputs[i].as_slice()).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| targets[i]).collect();
            let (loss, mut grads) = batch_gradient(&model, &xs, &ys)?;
            total_loss += loss;
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| *g *= scale);
            adam_step(model.params_mut(), &grads, &mut adam)?;
        }
        epoch_losses.push(total_loss / inputs.len() as f64);
    }
    if model.params().iter().any(|p| !p.is_finite()) {
        return Err(DnnError::InvalidModel("training diverged".into()));
    }
    Ok((model, TrainingHistory { epoch_losses }))
}
