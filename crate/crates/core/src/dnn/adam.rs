use serde::{Deserialize, Serialize};

use super::{DnnError, DnnSettings, Result};

/// Adam hyperparameters plus per-parameter moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            epsilon,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    /// lr 0.001, beta1 0.9, beta2 0.999, epsilon 1e-8.
    pub fn with_defaults(n_params: usize) -> Self {
        Self::new(n_params, 0.001, 0.9, 0.999, 1e-8)
    }

    pub fn from_settings(n_params: usize, s: &DnnSettings) -> Self {
        Self::new(n_params, s.learning_rate, s.beta1, s.beta2, s.epsilon)
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.m
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.v
    }
}

/// One Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(DnnError::DimensionMismatch {
            expected: state.m.len(),
            got: params.len().max(grads.len()),
        });
    }
    state.t += 1;
    let t = state.t as i32;
    let correct1 = 1.0 - state.beta1.powi(t);
    let correct2 = 1.0 - state.beta2.powi(t);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / correct1;
        let v_hat = *v / correct2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
    }
    Ok(())
}
