use serde::{Deserialize, Serialize};

use super::{GaussianMixture, HmmError, Result};
use crate::features::FeatureMatrix;
use crate::math::log_sum_exp;

/// One word's hidden Markov model: start distribution, transition matrix
/// and one Gaussian mixture per state, with probabilities kept as natural
/// logs. Structural zeros are `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct WordHmm {
    label: String,
    log_start: Vec<f64>,
    log_trans: Vec<Vec<f64>>,
    emissions: Vec<GaussianMixture>,
}

/// Most likely state sequence and its joint log probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViterbiPath {
    pub states: Vec<usize>,
    pub log_prob: f64,
}

fn stochastic(log_probs: &[f64]) -> bool {
    let total: f64 = log_probs.iter().map(|l| l.exp()).sum();
    (total - 1.0).abs() <= 1e-9
}

impl WordHmm {
    /// Validates shapes and stochasticity. A transition row may also be all
    /// `-inf`, which marks a state the chain cannot leave or stay in.
    pub fn new(
        label: impl Into<String>,
        log_start: Vec<f64>,
        log_trans: Vec<Vec<f64>>,
        emissions: Vec<GaussianMixture>,
    ) -> Result<Self> {
        let n = log_start.len();
        let invalid = |m: String| Err(HmmError::InvalidModel(m));
        if n == 0 || log_trans.len() != n || emissions.len() != n {
            return invalid(format!(
                "{n} start entries, {} transition rows, {} emission mixtures",
                log_trans.len(),
                emissions.len()
            ));
        }
        if log_trans.iter().any(|row| row.len() != n) {
            return invalid("transition matrix is not square".into());
        }
        let all_values = log_start.iter().chain(log_trans.iter().flatten());
        if all_values.clone().any(|l| l.is_nan() || *l > 1e-12) {
            return invalid("log probabilities must be <= 0".into());
        }
        if !stochastic(&log_start) {
            return invalid("start probabilities do not sum to 1".into());
        }
        for (i, row) in log_trans.iter().enumerate() {
            let dead = row.iter().all(|l| *l == f64::NEG_INFINITY);
            if !dead && !stochastic(row) {
                return invalid(format!("transition row {i} does not sum to 1"));
            }
        }
        let dims = emissions[0].dims();
        if emissions.iter().any(|e| e.dims() != dims) {
            return invalid("emission mixtures disagree on dimension".into());
        }
        Ok(Self {
            label: label.into(),
            log_start,
            log_trans,
            emissions,
        })
    }

    /// Left-to-right chain starting in state 0: each state either stays with
    /// probability `self_loop` or advances to the next; the last state
    /// always stays.
    pub fn left_to_right(
        label: impl Into<String>,
        self_loop: f64,
        emissions: Vec<GaussianMixture>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&self_loop) {
            return Err(HmmError::InvalidSettings(format!(
                "self-loop probability {self_loop} must lie in [0, 1)"
            )));
        }
        let n = emissions.len();
        if n == 0 {
            return Err(HmmError::InvalidModel("model needs at least one state".into()));
        }
        let mut log_start = vec![f64::NEG_INFINITY; n];
        log_start[0] = 0.0;
        let log_trans = (0..n)
            .map(|i| {
                let mut row = vec![f64::NEG_INFINITY; n];
                if i + 1 == n {
                    row[i] = 0.0;
                } else {
                    row[i] = self_loop.ln();
                    row[i + 1] = (1.0 - self_loop).ln();
                }
                row
            })
            .collect();
        Self::new(label, log_start, log_trans, emissions)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n_states(&self) -> usize {
        self.log_start.len()
    }

    pub fn dims(&self) -> usize {
        self.emissions[0].dims()
    }

    pub fn log_start(&self) -> &[f64] {
        &self.log_start
    }

    pub fn log_trans(&self) -> &[Vec<f64>] {
        &self.log_trans
    }

    pub fn emissions(&self) -> &[GaussianMixture] {
        &self.emissions
    }

    /// True when every transition is a self-loop or a single step forward.
    pub fn is_left_to_right(&self) -> bool {
        self.log_trans.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, l)| *l == f64::NEG_INFINITY || j == i || j == i + 1)
        })
    }

    fn check_obs(&self, obs: &FeatureMatrix) -> Result<()> {
        if obs.is_empty() {
            return Err(HmmError::EmptySequence);
        }
        if obs.dims() != self.dims() {
            return Err(HmmError::DimensionMismatch {
                expected: self.dims(),
                got: obs.dims(),
            });
        }
        Ok(())
    }

    /// `T x N` table of per-state emission log densities, row-major.
    pub fn emission_log_probs(&self, obs: &FeatureMatrix) -> Vec<f64> {
        obs.frames()
            .flat_map(|x| self.emissions.iter().map(move |g| g.log_pdf(x)))
            .collect()
    }

    /// Log forward variables (`T x N`, row-major) and the total log
    /// likelihood, given precomputed emission log densities.
    pub(crate) fn forward_table(&self, log_b: &[f64]) -> (Vec<f64>, f64) {
        let n = self.n_states();
        let steps = log_b.len() / n;
        let mut alpha = vec![f64::NEG_INFINITY; log_b.len()];
        for j in 0..n {
            alpha[j] = self.log_start[j] + log_b[j];
        }
        let mut terms = vec![0.0; n];
        for t in 1..steps {
            for j in 0..n {
                for (i, term) in terms.iter_mut().enumerate() {
                    *term = alpha[(t - 1) * n + i] + self.log_trans[i][j];
                }
                alpha[t * n + j] = log_sum_exp(&terms) + log_b[t * n + j];
            }
        }
        let total = log_sum_exp(&alpha[(steps - 1) * n..]);
        (alpha, total)
    }

    /// Log backward variables, `T x N`, row-major.
    pub(crate) fn backward_table(&self, log_b: &[f64]) -> Vec<f64> {
        let n = self.n_states();
        let steps = log_b.len() / n;
        let mut beta = vec![f64::NEG_INFINITY; log_b.len()];
        for slot in &mut beta[(steps - 1) * n..] {
            *slot = 0.0;
        }
        let mut terms = vec![0.0; n];
        for t in (0..steps - 1).rev() {
            for i in 0..n {
                for (j, term) in terms.iter_mut().enumerate() {
                    *term = self.log_trans[i][j] + log_b[(t + 1) * n + j] + beta[(t + 1) * n + j];
                }
                beta[t * n + i] = log_sum_exp(&terms);
            }
        }
        beta
    }

    /// `ln P(O | model)` by the forward recursion. Returns `-inf` when no
    /// state path can produce a sequence of this length.
    pub fn forward_log_likelihood(&self, obs: &FeatureMatrix) -> Result<f64> {
        self.check_obs(obs)?;
        let log_b = self.emission_log_probs(obs);
        Ok(self.forward_table(&log_b).1)
    }

    /// Highest-scoring state path. Among equally scoring paths the
    /// lexicographically smallest one is returned.
    pub fn viterbi(&self, obs: &FeatureMatrix) -> Result<ViterbiPath> {
        self.check_obs(obs)?;
        let n = self.n_states();
        let log_b = self.emission_log_probs(obs);
        let steps = obs.n_frames();

        // best[t * n + i]: best score of frames t+1.. given state i at t.
        let mut best = vec![0.0; steps * n];
        for t in (0..steps - 1).rev() {
            for i in 0..n {
                best[t * n + i] = (0..n)
                    .map(|j| self.log_trans[i][j] + log_b[(t + 1) * n + j] + best[(t + 1) * n + j])
                    .fold(f64::NEG_INFINITY, f64::max);
            }
        }

        // Walk forward choosing the lowest index that keeps the optimum.
        let first_best = |scores: &mut dyn Iterator<Item = f64>| {
            let mut arg = 0;
            let mut top = f64::NEG_INFINITY;
            for (k, s) in scores.enumerate() {
                if s > top {
                    top = s;
                    arg = k;
                }
            }
            (arg, top)
        };
        let (start, log_prob) =
            first_best(&mut (0..n).map(|i| self.log_start[i] + log_b[i] + best[i]));
        if log_prob == f64::NEG_INFINITY {
            return Err(HmmError::Infeasible);
        }
        let mut states = Vec::with_capacity(steps);
        states.push(start);
        for t in 1..steps {
            let prev = states[t - 1];
            let (next, _) = first_best(
                &mut (0..n).map(|j| self.log_trans[prev][j] + log_b[t * n + j] + best[t * n + j]),
            );
            states.push(next);
        }
        Ok(ViterbiPath { states, log_prob })
    }
}
