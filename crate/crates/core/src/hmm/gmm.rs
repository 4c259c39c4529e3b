use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{HmmError, Result};
use crate::math::log_sum_exp;

/// Diagonal-covariance Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureParams", into = "MixtureParams")]
pub struct GaussianMixture {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
    /// Per component: `ln w - 0.5 * sum ln(2 pi var)`.
    log_norm: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MixtureParams {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    variances: Vec<Vec<f64>>,
}

impl TryFrom<MixtureParams> for GaussianMixture {
    type Error = HmmError;
    fn try_from(p: MixtureParams) -> Result<Self> {
        GaussianMixture::new(p.weights, p.means, p.variances)
    }
}

impl From<GaussianMixture> for MixtureParams {
    fn from(g: GaussianMixture) -> Self {
        MixtureParams {
            weights: g.weights,
            means: g.means,
            variances: g.variances,
        }
    }
}

impl GaussianMixture {
    pub fn new(weights: Vec<f64>, means: Vec<Vec<f64>>, variances: Vec<Vec<f64>>) -> Result<Self> {
        let invalid = |m: String| Err(HmmError::InvalidModel(m));
        if weights.is_empty() || weights.len() != means.len() || weights.len() != variances.len() {
            return invalid("mixture needs matching, non-empty weights/means/variances".into());
        }
        let dims = means[0].len();
        if dims == 0 || means.iter().chain(&variances).any(|v| v.len() != dims) {
            return invalid("mixture components disagree on dimension".into());
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return invalid("mixture weights must be finite and non-negative".into());
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("mixture weights sum to {total}"));
        }
        if means.iter().flatten().any(|m| !m.is_finite()) {
            return invalid("mixture means must be finite".into());
        }
        if variances.iter().flatten().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return invalid("mixture variances must be finite and positive".into());
        }
        let log_norm = weights
            .iter()
            .zip(&variances)
            .map(|(w, var)| {
                w.ln() - 0.5 * var.iter().map(|v| (2.0 * PI * v).ln()).sum::<f64>()
            })
            .collect();
        Ok(Self {
            weights,
            means,
            variances,
            log_norm,
        })
    }

    /// Single diagonal Gaussian.
    pub fn single(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        Self::new(vec![1.0], vec![mean], vec![variance])
    }

    pub fn dims(&self) -> usize {
        self.means[0].len()
    }

    pub fn n_components(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>] {
        &self.variances
    }

    /// Writes `ln w_c + ln N(x; mu_c, var_c)` for every component into `out`.
    pub fn component_log_densities(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dims());
        for (c, slot) in out.iter_mut().enumerate().take(self.n_components()) {
            let quad: f64 = x
                .iter()
                .zip(&self.means[c])
                .zip(&self.variances[c])
                .map(|((x, m), v)| (x - m) * (x - m) / v)
                .sum();
            *slot = self.log_norm[c] - 0.5 * quad;
        }
    }

    /// Log density of the mixture at `x`.
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        let mut comps = vec![0.0; self.n_components()];
        self.component_log_densities(x, &mut comps);
        log_sum_exp(&comps)
    }
}
