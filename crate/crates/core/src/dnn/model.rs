use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{features_to_input, softmax_cross_entropy, DnnError, Result, Standardizer};
use crate::features::FeatureMatrix;
use crate::math::softmax;

/// Layered feedforward network. All weights and biases live in one flat
/// parameter vector: for each layer, the `out x in` weight matrix
/// (row-major) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
    class_labels: Vec<String>,
    target_frames: usize,
    standardizer: Standardizer,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpModel {
    pub fn new(
        layer_sizes: Vec<usize>,
        params: Vec<f64>,
        class_labels: Vec<String>,
        target_frames: usize,
        standardizer: Standardizer,
    ) -> Result<Self> {
        let invalid = |m: String| Err(DnnError::InvalidModel(m));
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return invalid(format!("bad layer sizes {layer_sizes:?}"));
        }
        let expected = Self::param_count(&layer_sizes);
        if params.len() != expected {
            return invalid(format!("{} parameters, layout needs {expected}", params.len()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return invalid("non-finite parameter".into());
        }
        if class_labels.len() != *layer_sizes.last().unwrap() {
            return invalid(format!(
                "{} class labels for {} outputs",
                class_labels.len(),
                layer_sizes.last().unwrap()
            ));
        }
        if class_labels.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("class labels must be sorted and unique".into());
        }
        let dims = standardizer.mean.len();
        if dims == 0 || standardizer.std.len() != dims || target_frames * dims != layer_sizes[0] {
            return invalid(format!(
                "input width {} does not match {target_frames} frames of {dims} coefficients",
                layer_sizes[0]
            ));
        }
        Ok(Self {
            layer_sizes,
            params,
            class_labels,
            target_frames,
            standardizer,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(
        layer_sizes: Vec<usize>,
        class_labels: Vec<String>,
        target_frames: usize,
        standardizer: Standardizer,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut params = Vec::with_capacity(Self::param_count(&layer_sizes));
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)));
            params.extend(std::iter::repeat(0.0).take(fan_out));
        }
        Self::new(layer_sizes, params, class_labels, target_frames, standardizer)
    }

    pub fn param_count(layer_sizes: &[usize]) -> usize {
        layer_sizes.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn target_frames(&self) -> usize {
        self.target_frames
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offset(&self, layer: usize) -> usize {
        Self::param_count(&self.layer_sizes[..=layer])
    }

    /// Weights (`out x in`, row-major) and biases of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let start = self.offset(l);
        let w = &self.params[start..start + n_in * n_out];
        let b = &self.params[start + n_in * n_out..start + n_in * n_out + n_out];
        (w, b)
    }

    /// Standardized, cropped or padded, flattened network input for `fm`.
    pub fn input_for(&self, fm: &FeatureMatrix) -> Result<Vec<f64>> {
        let z = self.standardizer.apply(fm)?;
        Ok(features_to_input(&z, self.target_frames))
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }
}

/// Layer activations from one forward pass; `activations[0]` is the input
/// and the last entry holds the logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn logits(&self) -> &[f64] {
        self.activations.last().unwrap()
    }
}

pub fn forward_pass(model: &MlpModel, x: &[f64]) -> Result<ForwardCache> {
    if x.len() != model.layer_sizes[0] {
        return Err(DnnError::DimensionMismatch {
            expected: model.layer_sizes[0],
            got: x.len(),
        });
    }
    let last = model.n_layers() - 1;
    let mut activations = Vec::with_capacity(model.n_layers() + 1);
    activations.push(x.to_vec());
    for l in 0..model.n_layers() {
        let (w, b) = model.layer(l);
        let input = &activations[l];
        let n_in = input.len();
        let out: Vec<f64> = b
            .iter()
            .enumerate()
            .map(|(j, bias)| {
                let row = &w[j * n_in..(j + 1) * n_in];
                let z = bias + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                if l == last {
                    z
                } else {
                    sigmoid(z)
                }
            })
            .collect();
        activations.push(out);
    }
    Ok(ForwardCache { activations })
}

/// Loss and gradient of the loss with respect to every parameter, in the
/// same flat layout as [`MlpModel::params`].
pub fn backprop(model: &MlpModel, x: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    let cache = forward_pass(model, x)?;
    let (loss, mut delta) = softmax_cross_entropy(cache.logits(), label)?;
    let mut grads = vec![0.0; model.params.len()];
    for l in (0..model.n_layers()).rev() {
        let input = &cache.activations[l];
        let n_in = input.len();
        let n_out = delta.len();
        let start = model.offset(l);
        let (gw, gb) = grads[start..start + n_in * n_out + n_out].split_at_mut(n_in * n_out);
        for (j, d) in delta.iter().enumerate() {
            if *d != 0.0 {
                for (g, a) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(input) {
                    *g = d * a;
                }
            }
            gb[j] = *d;
        }
        if l > 0 {
            let (w, _) = model.layer(l);
            let mut prev = vec![0.0; n_in];
            for (j, d) in delta.iter().enumerate() {
                for (p, wji) in prev.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                    *p += d * wji;
                }
            }
            for (p, a) in prev.iter_mut().zip(input) {
                *p *= a * (1.0 - a);
            }
            delta = prev;
        }
    }
    Ok((loss, grads))
}

/// Summed loss and summed gradient over a batch of examples.
///
/// Examples are processed in parallel, but every gradient element is
/// accumulated over the examples in their given order, so the result does
/// not depend on the number of threads.
pub fn batch_gradient(model: &MlpModel, inputs: &[&[f64]], labels: &[usize]) -> Result<(f64, Vec<f64>)> {
    if inputs.len() != labels.len() {
        return Err(DnnError::DimensionMismatch {
            expected: inputs.len(),
            got: labels.len(),
        });
    }
    // Per example: activations and the error signal of every layer.
    let traces = inputs
        .par_iter()
        .zip(labels)
        .map(|(x, &label)| -> Result<(f64, ForwardCache, Vec<Vec<f64>>)> {
            let cache = forward_pass(model, x)?;
            let (loss, top) = softmax_cross_entropy(cache.logits(), label)?;
            let mut deltas = vec![Vec::new(); model.n_layers()];
            deltas[model.n_layers() - 1] = top;
            for l in (1..model.n_layers()).rev() {
                let (w, _) = model.layer(l);
                let a = &cache.activations[l];
                let n_in = a.len();
                let mut prev = vec![0.0; n_in];
                for (j, d) in deltas[l].iter().enumerate() {
                    for (p, wji) in prev.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                        *p += d * wji;
                    }
                }
                for (p, a) in prev.iter_mut().zip(a) {
                    *p *= a * (1.0 - a);
                }
                deltas[l - 1] = prev;
            }
            Ok((loss, cache, deltas))
        })
        .collect::<Result<Vec<_>>>()?;
    let loss = traces.iter().map(|(l, _, _)| l).sum();
    let mut grads = vec![0.0; model.params.len()];
    for l in 0..model.n_layers() {
        let (n_in, n_out) = (model.layer_sizes[l], model.layer_sizes[l + 1]);
        let start = model.offset(l);
        let (gw, gb) = grads[start..start + n_in * n_out + n_out].split_at_mut(n_in * n_out);
        gw.par_chunks_mut(n_in).enumerate().for_each(|(j, row)| {
            for (_, cache, deltas) in &traces {
                let d = deltas[l][j];
                if d != 0.0 {
                    for (g, a) in row.iter_mut().zip(&cache.activations[l]) {
                        *g += d * a;
                    }
                }
            }
        });
        for (j, b) in gb.iter_mut().enumerate() {
            for (_, _, deltas) in &traces {
                *b += deltas[l][j];
            }
        }
    }
    Ok((loss, grads))
}

/// Predicted word and class probabilities in label order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: String,
    pub probabilities: Vec<(String, f64)>,
}

/// Most probable class for `fm`; ties go to the lexicographically first label.
pub fn predict(model: &MlpModel, fm: &FeatureMatrix) -> Result<Prediction> {
    let x = model.input_for(fm)?;
    let cache = forward_pass(model, &x)?;
    let probs = softmax(cache.logits());
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    Ok(Prediction {
        label: model.class_labels[best].clone(),
        probabilities: model.class_labels.iter().cloned().zip(probs).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i:02}")).collect()
    }

    fn random_model(sizes: &[usize], seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MlpModel::init(
            sizes.to_vec(),
            labels(*sizes.last().unwrap()),
            sizes[0],
            Standardizer::identity(1),
            &mut rng,
        )
        .unwrap();
        // Non-zero biases so every term of the gradient is exercised.
        for p in m.params_mut() {
            *p += rng.gen_range(-0.1..0.1);
        }
        m
    }

    #[test]
    fn zero_network_outputs() {
        let sizes = vec![3, 4, 2];
        let m = MlpModel::new(
            sizes.clone(),
            vec![0.0; MlpModel::param_count(&sizes)],
            labels(2),
            3,
            Standardizer::identity(1),
        )
        .unwrap();
        let cache = forward_pass(&m, &[0.3, -1.0, 2.0]).unwrap();
        assert!(cache.activations[1].iter().all(|a| *a == 0.5));
        assert_eq!(cache.logits(), &[0.0, 0.0]);
    }

    #[test]
    fn single_neuron_at_zero() {
        // 1 -> 1 hidden (w=1, b=0) -> 2 outputs.
        let m = MlpModel::new(
            vec![1, 1, 2],
            vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            labels(2),
            1,
            Standardizer::identity(1),
        )
        .unwrap();
        let cache = forward_pass(&m, &[0.0]).unwrap();
        assert_eq!(cache.activations[1], vec![0.5]);
    }

    #[test]
    fn forward_matches_explicit_arithmetic() {
        let m = random_model(&[4, 3, 2], 7);
        let x = [0.5, -0.25, 1.0, 0.1];
        let (w0, b0) = m.layer(0);
        let (w1, b1) = m.layer(1);
        let mut h = [0.0; 3];
        for j in 0..3 {
            let mut z = b0[j];
            for i in 0..4 {
                z += w0[j * 4 + i] * x[i];
            }
            h[j] = 1.0 / (1.0 + (-z).exp());
        }
        let mut logits = [0.0; 2];
        for k in 0..2 {
            logits[k] = b1[k] + (0..3).map(|j| w1[k * 3 + j] * h[j]).sum::<f64>();
        }
        let cache = forward_pass(&m, &x).unwrap();
        for (a, b) in cache.logits().iter().zip(&logits) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_input_gives_zero_first_layer_weight_gradient() {
        let m = random_model(&[5, 4, 3], 3);
        let (_, g) = backprop(&m, &[0.0; 5], 1).unwrap();
        assert!(g[..20].iter().all(|v| *v == 0.0));
        assert!(g[20..24].iter().any(|v| *v != 0.0));
    }

    #[test]
    fn duplicated_example_doubles_summed_gradient() {
        let m = random_model(&[3, 4, 2], 9);
        let x = [0.2, -0.4, 0.9];
        let (_, g) = backprop(&m, &x, 0).unwrap();
        let doubled: Vec<f64> = g.iter().map(|v| v + v).collect();
        let (_, again) = backprop(&m, &x, 0).unwrap();
        let sum: Vec<f64> = g.iter().zip(&again).map(|(a, b)| a + b).collect();
        assert_eq!(sum, doubled);
    }

    #[test]
    fn batch_gradient_is_sum_of_example_gradients() {
        let m = random_model(&[4, 5, 3, 3], 21);
        let xs = [[0.1, -0.2, 0.3, 0.9], [1.0, 0.0, -1.0, 0.5], [0.0, 0.4, 0.2, -0.6]];
        let labels = [2, 0, 1];
        let refs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
        let (loss, g) = batch_gradient(&m, &refs, &labels).unwrap();
        let mut sum = vec![0.0; g.len()];
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(&labels) {
            let (l, gi) = backprop(&m, x, y).unwrap();
            total += l;
            for (s, v) in sum.iter_mut().zip(gi) {
                *s += v;
            }
        }
        assert!((loss - total).abs() < 1e-12);
        for (a, b) in g.iter().zip(&sum) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let m = random_model(&[3, 2], 1);
        assert!(matches!(
            forward_pass(&m, &[0.0; 4]),
            Err(DnnError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_unsorted_labels() {
        let sizes = vec![1, 2];
        let r = MlpModel::new(
            sizes.clone(),
            vec![0.0; MlpModel::param_count(&sizes)],
            vec!["b".into(), "a".into()],
            1,
            Standardizer::identity(1),
        );
        assert!(r.is_err());
    }
}
