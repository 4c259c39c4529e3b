use serde::{Deserialize, Serialize};

use super::{DnnError, Result};
use crate::features::FeatureMatrix;

/// Flattens a feature matrix to exactly `target_frames * dims` values.
///
/// Longer sequences are center-cropped; shorter ones get zero frames split
/// evenly before and after (the extra frame goes after when the gap is odd).
pub fn features_to_input(fm: &FeatureMatrix, target_frames: usize) -> Vec<f64> {
    let dims = fm.dims();
    let t = fm.n_frames();
    let mut out = vec![0.0; target_frames * dims];
    if t >= target_frames {
        let skip = (t - target_frames) / 2;
        out.copy_from_slice(&fm.as_slice()[skip * dims..(skip + target_frames) * dims]);
    } else {
        let before = (target_frames - t) / 2;
        out[before * dims..(before + t) * dims].copy_from_slice(fm.as_slice());
    }
    out
}

/// Per-coefficient mean and standard deviation from training frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit<'a>(sequences: impl IntoIterator<Item = &'a FeatureMatrix>) -> Result<Self> {
        let mut count = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sum_sq: Vec<f64> = Vec::new();
        for fm in sequences {
            if sum.is_empty() {
                sum = vec![0.0; fm.dims()];
                sum_sq = vec![0.0; fm.dims()];
            } else if fm.dims() != sum.len() {
                return Err(DnnError::DimensionMismatch {
                    expected: sum.len(),
                    got: fm.dims(),
                });
            }
            for frame in fm.frames() {
                count += 1;
                for (d, x) in frame.iter().enumerate() {
                    sum[d] += x;
                    sum_sq[d] += x * x;
                }
            }
        }
        if count == 0 {
            return Err(DnnError::InvalidModel("no frames to standardize".into()));
        }
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let std = sum_sq
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n - m * m).max(0.0).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn identity(dims: usize) -> Self {
        Self {
            mean: vec![0.0; dims],
            std: vec![1.0; dims],
        }
    }

    pub fn apply(&self, fm: &FeatureMatrix) -> Result<FeatureMatrix> {
        if fm.dims() != self.mean.len() {
            return Err(DnnError::DimensionMismatch {
                expected: self.mean.len(),
                got: fm.dims(),
            });
        }
        let data = fm
            .frames()
            .flat_map(|f| {
                f.iter()
                    .zip(&self.mean)
                    .zip(&self.std)
                    .map(|((x, m), s)| (x - m) / s)
            })
            .collect();
        FeatureMatrix::new(fm.dims(), data).map_err(|e| DnnError::InvalidModel(e.to_string()))
    }
}
