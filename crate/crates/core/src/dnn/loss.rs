use super::{DnnError, Result};
use crate::math::softmax;

/// Softmax cross-entropy on raw logits: returns `-ln softmax(z)[label]` and
/// its gradient `softmax(z) - one_hot(label)`.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
    if label >= logits.len() {
        return Err(DnnError::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let loss = (log_norm - logits[label]).max(0.0);
    let mut grad = softmax(logits);
    grad[label] -= 1.0;
    Ok((loss, grad))
}
