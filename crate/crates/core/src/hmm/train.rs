//! Baum-Welch re-estimation for left-to-right word models with diagonal
//! Gaussian-mixture emissions, pooled over several training sequences.

use serde::{Deserialize, Serialize};

use super::{GaussianMixture, HmmError, Result, WordHmm};
use crate::features::FeatureMatrix;
use crate::math::log_sum_exp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmmSettings {
    pub n_states: usize,
    pub n_mixtures: usize,
    pub max_iterations: usize,
    /// Training stops once the total log likelihood improves by less.
    pub tolerance: f64,
    pub variance_floor: f64,
    pub weight_floor: f64,
    /// Initial self-loop probability of every non-final state.
    pub self_loop: f64,
}

impl Default for HmmSettings {
    fn default() -> Self {
        Self {
            n_states: 5,
            n_mixtures: 2,
            max_iterations: 50,
            tolerance: 1e-4,
            variance_floor: 1e-3,
            weight_floor: 1e-6,
            self_loop: 0.6,
        }
    }
}

impl HmmSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HmmError::InvalidSettings(m));
        if !(1..=64).contains(&self.n_states) {
            return bad(format!("n_states {} must lie in [1, 64]", self.n_states));
        }
        if !(1..=64).contains(&self.n_mixtures) {
            return bad(format!("n_mixtures {} must lie in [1, 64]", self.n_mixtures));
        }
        if self.max_iterations > 10_000 {
            return bad("max_iterations must be <= 10000".into());
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be >= 0".into());
        }
        if !(self.variance_floor > 0.0) {
            return bad("variance_floor must be positive".into());
        }
        if !(self.weight_floor >= 0.0 && self.weight_floor * self.n_mixtures as f64 <= 1.0) {
            return bad("weight_floor must lie in [0, 1 / n_mixtures]".into());
        }
        if !(0.0..1.0).contains(&self.self_loop) {
            return bad("self_loop must lie in [0, 1)".into());
        }
        Ok(())
    }
}

/// Total training log likelihood before each re-estimation, plus the value
/// for the returned model as the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub log_likelihoods: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Trains one word model with Baum-Welch.
///
/// The model is initialized deterministically: every sequence is cut into
/// `n_states` equal segments, each state's Gaussians start from the pooled
/// statistics of its segments (component means offset by a fraction of a
/// standard deviation so mixtures can separate), weights are uniform and
/// transitions use the configured self-loop probability.
pub fn train_word_hmm(
    label: &str,
    sequences: &[&FeatureMatrix],
    settings: &HmmSettings,
) -> Result<(WordHmm, TrainingTrace)> {
    settings.validate()?;
    if sequences.is_empty() {
        return Err(HmmError::NoTrainingData(label.to_string()));
    }
    let dims = sequences[0].dims();
    for seq in sequences {
        if seq.dims() != dims {
            return Err(HmmError::DimensionMismatch {
                expected: dims,
                got: seq.dims(),
            });
        }
        if seq.n_frames() < settings.n_states {
            return Err(HmmError::SequenceTooShort {
                label: label.to_string(),
                frames: seq.n_frames(),
                states: settings.n_states,
            });
        }
    }

    let mut model = initial_model(label, sequences, settings)?;
    let mut log_likelihoods = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let stats = accumulate(&model, sequences)?;
        if let Some(prev) = log_likelihoods.last() {
            if stats.log_likelihood - prev < settings.tolerance {
                converged = true;
            }
        }
        log_likelihoods.push(stats.log_likelihood);
        if converged || iterations == settings.max_iterations {
            break;
        }
        model = reestimate(&model, &stats, settings)?;
        iterations += 1;
    }
    Ok((
        model,
        TrainingTrace {
            log_likelihoods,
            iterations,
            converged,
        },
    ))
}

fn initial_model(label: &str, sequences: &[&FeatureMatrix], settings: &HmmSettings) -> Result<WordHmm> {
    let n = settings.n_states;
    let dims = sequences[0].dims();
    let mut count = vec![0.0; n];
    let mut sum = vec![vec![0.0; dims]; n];
    let mut sum_sq = vec![vec![0.0; dims]; n];
    for seq in sequences {
        let len = seq.n_frames();
        for (t, x) in seq.frames().enumerate() {
            let s = t * n / len;
            count[s] += 1.0;
            for d in 0..dims {
                sum[s][d] += x[d];
                sum_sq[s][d] += x[d] * x[d];
            }
        }
    }
    let m = settings.n_mixtures;
    let emissions = (0..n)
        .map(|s| {
            let mean: Vec<f64> = sum[s].iter().map(|v| v / count[s]).collect();
            let var: Vec<f64> = (0..dims)
                .map(|d| (sum_sq[s][d] / count[s] - mean[d] * mean[d]).max(settings.variance_floor))
                .collect();
            let means = (0..m)
                .map(|c| {
                    let offset = if m == 1 {
                        0.0
                    } else {
                        c as f64 / (m - 1) as f64 - 0.5
                    };
                    mean.iter()
                        .zip(&var)
                        .map(|(mu, v)| mu + offset * v.sqrt())
                        .collect()
                })
                .collect();
            GaussianMixture::new(vec![1.0 / m as f64; m], means, vec![var; m])
        })
        .collect::<Result<Vec<_>>>()?;
    WordHmm::left_to_right(label, settings.self_loop, emissions)
}

struct Statistics {
    log_likelihood: f64,
    start: Vec<f64>,
    trans: Vec<Vec<f64>>,
    /// `[state][component]` occupancy and moment sums.
    occupancy: Vec<Vec<f64>>,
    first: Vec<Vec<Vec<f64>>>,
    second: Vec<Vec<Vec<f64>>>,
}

fn accumulate(model: &WordHmm, sequences: &[&FeatureMatrix]) -> Result<Statistics> {
    let n = model.n_states();
    let m = model.emissions()[0].n_components();
    let dims = model.dims();
    let mut stats = Statistics {
        log_likelihood: 0.0,
        start: vec![0.0; n],
        trans: vec![vec![0.0; n]; n],
        occupancy: vec![vec![0.0; m]; n],
        first: vec![vec![vec![0.0; dims]; m]; n],
        second: vec![vec![vec![0.0; dims]; m]; n],
    };
    let mut comp = vec![0.0; m];
    for seq in sequences {
        let steps = seq.n_frames();
        // Component log densities [t][state][component] and state totals.
        let mut log_comp = vec![0.0; steps * n * m];
        let mut log_b = vec![0.0; steps * n];
        for (t, x) in seq.frames().enumerate() {
            for (j, g) in model.emissions().iter().enumerate() {
                g.component_log_densities(x, &mut comp);
                log_comp[(t * n + j) * m..(t * n + j + 1) * m].copy_from_slice(&comp);
                log_b[t * n + j] = log_sum_exp(&comp);
            }
        }
        let (alpha, ll) = model.forward_table(&log_b);
        if ll == f64::NEG_INFINITY {
            return Err(HmmError::Infeasible);
        }
        let beta = model.backward_table(&log_b);
        stats.log_likelihood += ll;

        for (t, x) in seq.frames().enumerate() {
            for j in 0..n {
                let gamma = alpha[t * n + j] + beta[t * n + j] - ll;
                if gamma == f64::NEG_INFINITY {
                    continue;
                }
                if t == 0 {
                    stats.start[j] += gamma.exp();
                }
                for c in 0..m {
                    let w = (gamma + log_comp[(t * n + j) * m + c] - log_b[t * n + j]).exp();
                    if w == 0.0 || !w.is_finite() {
                        continue;
                    }
                    stats.occupancy[j][c] += w;
                    let (s1, s2) = (&mut stats.first[j][c], &mut stats.second[j][c]);
                    for d in 0..dims {
                        s1[d] += w * x[d];
                        s2[d] += w * x[d] * x[d];
                    }
                }
            }
            if t + 1 < steps {
                for i in 0..n {
                    let a = alpha[t * n + i];
                    if a == f64::NEG_INFINITY {
                        continue;
                    }
                    for j in 0..n {
                        let lt = model.log_trans()[i][j];
                        if lt == f64::NEG_INFINITY {
                            continue;
                        }
                        let xi = a + lt + log_b[(t + 1) * n + j] + beta[(t + 1) * n + j] - ll;
                        stats.trans[i][j] += xi.exp();
                    }
                }
            }
        }
    }
    Ok(stats)
}

/// Occupancy below which a component keeps its previous parameters.
const MIN_OCCUPANCY: f64 = 1e-10;

fn reestimate(model: &WordHmm, stats: &Statistics, settings: &HmmSettings) -> Result<WordHmm> {
    let n = model.n_states();
    let start_total: f64 = stats.start.iter().sum();
    let log_start = if start_total > 0.0 {
        stats.start.iter().map(|s| (s / start_total).ln()).collect()
    } else {
        model.log_start().to_vec()
    };
    let log_trans = (0..n)
        .map(|i| {
            let total: f64 = stats.trans[i].iter().sum();
            if total > MIN_OCCUPANCY {
                stats.trans[i].iter().map(|x| (x / total).ln()).collect()
            } else {
                model.log_trans()[i].clone()
            }
        })
        .collect();

    let emissions = model
        .emissions()
        .iter()
        .enumerate()
        .map(|(j, old)| {
            let occ = &stats.occupancy[j];
            let total: f64 = occ.iter().sum();
            if total <= MIN_OCCUPANCY {
                return Ok(old.clone());
            }
            let weights = floored_weights(occ, settings.weight_floor);
            let mut means = Vec::with_capacity(occ.len());
            let mut variances = Vec::with_capacity(occ.len());
            for c in 0..occ.len() {
                if occ[c] <= MIN_OCCUPANCY {
                    means.push(old.means()[c].clone());
                    variances.push(old.variances()[c].clone());
                    continue;
                }
                let mean: Vec<f64> = stats.first[j][c].iter().map(|s| s / occ[c]).collect();
                let var = stats.second[j][c]
                    .iter()
                    .zip(&mean)
                    .map(|(s, mu)| (s / occ[c] - mu * mu).max(settings.variance_floor))
                    .collect();
                means.push(mean);
                variances.push(var);
            }
            GaussianMixture::new(weights, means, variances)
        })
        .collect::<Result<Vec<_>>>()?;
    WordHmm::new(model.label(), log_start, log_trans, emissions)
}

/// Maximizes `sum_c n_c ln w_c` subject to `w_c >= floor` and `sum w_c = 1`:
/// components whose share would fall under the floor are pinned to it and
/// the rest share the remaining mass in proportion to their occupancy.
fn floored_weights(occupancy: &[f64], floor: f64) -> Vec<f64> {
    let m = occupancy.len();
    let mut pinned = vec![false; m];
    loop {
        let free_mass = 1.0 - floor * pinned.iter().filter(|p| **p).count() as f64;
        let free_occ: f64 = occupancy
            .iter()
            .zip(&pinned)
            .filter(|(_, p)| !**p)
            .map(|(o, _)| o)
            .sum();
        let weights: Vec<f64> = (0..m)
            .map(|c| {
                if pinned[c] {
                    floor
                } else {
                    free_mass * occupancy[c] / free_occ
                }
            })
            .collect();
        let mut changed = false;
        for c in 0..m {
            if !pinned[c] && weights[c] < floor {
                pinned[c] = true;
                changed = true;
            }
        }
        if !changed {
            // Guard the 1e-9 sum invariant against rounding.
            let total: f64 = weights.iter().sum();
            return weights.into_iter().map(|w| w / total).collect();
        }
    }
}
