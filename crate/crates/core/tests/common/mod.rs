//! Independent oracles and the acceptance criteria checks, shared by the
//! integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use isoword::audio::{enhance, AudioClip};
use isoword::config::ToolConfig;
use isoword::dnn::{adam_step, backprop, forward_pass, softmax_cross_entropy, AdamState, MlpModel, Standardizer};
use isoword::eval::{
    augment_corpus, reference, run_experiment, ClassifierKind, ExperimentSpec, FeatureSet, ReportRow, SplitMode,
    SplitParams, SweepMode, SweepReport, TrainedModel, TABLE_II_LEVELS,
};
use isoword::features::{dft, FeatureMatrix, FeatureSettings, MfccExtractor};
use isoword::hmm::{train_word_hmm, GaussianMixture, HmmSettings, WordHmm};
use isoword::synth::{generate, SynthSpec};
use isoword::workflow::{self, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one acceptance criterion.
pub struct Check {
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

// ---------------------------------------------------------------- oracles

/// O(n^2) DFT by direct summation. The phase index is reduced modulo `n`
/// before conversion to an angle so large `t * k` products stay exact.
pub fn direct_dft(x: &[f64], n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (t, &v) in x.iter().enumerate() {
                let angle = -TAU * ((t * k) % n) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            (re, im)
        })
        .collect()
}

/// Diagonal-covariance mixture density evaluated in probability space.
pub fn mixture_density(g: &GaussianMixture, x: &[f64]) -> f64 {
    g.weights()
        .iter()
        .zip(g.means())
        .zip(g.variances())
        .map(|((w, mean), var)| {
            w * x
                .iter()
                .zip(mean)
                .zip(var)
                .map(|((xi, m), v)| (-(xi - m) * (xi - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt())
                .product::<f64>()
        })
        .sum()
}

/// Calls `f` for every state sequence of length `t` over `n` states, in
/// lexicographic order.
pub fn for_each_path(n: usize, t: usize, mut f: impl FnMut(&[usize])) {
    let mut path = vec![0; t];
    loop {
        f(&path);
        let mut pos = t;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            path[pos] += 1;
            if path[pos] < n {
                break;
            }
            path[pos] = 0;
        }
    }
}

/// `ln P(O)` as the explicit sum over every state path.
pub fn exhaustive_likelihood(model: &WordHmm, obs: &FeatureMatrix) -> f64 {
    let n = model.n_states();
    let b: Vec<Vec<f64>> = obs
        .frames()
        .map(|x| model.emissions().iter().map(|g| mixture_density(g, x)).collect())
        .collect();
    let start: Vec<f64> = model.log_start().iter().map(|l| l.exp()).collect();
    let trans: Vec<Vec<f64>> = model
        .log_trans()
        .iter()
        .map(|row| row.iter().map(|l| l.exp()).collect())
        .collect();
    let mut total = 0.0;
    for_each_path(n, obs.n_frames(), |path| {
        let mut p = start[path[0]] * b[0][path[0]];
        for t in 1..path.len() {
            p *= trans[path[t - 1]][path[t]] * b[t][path[t]];
        }
        total += p;
    });
    total.ln()
}

/// Best path by enumeration; the first path (lexicographically) wins ties.
pub fn exhaustive_viterbi(model: &WordHmm, obs: &FeatureMatrix) -> (Vec<usize>, f64) {
    let n = model.n_states();
    let log_b: Vec<Vec<f64>> = obs
        .frames()
        .map(|x| model.emissions().iter().map(|g| g.log_pdf(x)).collect())
        .collect();
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for_each_path(n, obs.n_frames(), |path| {
        let mut s = model.log_start()[path[0]] + log_b[0][path[0]];
        for t in 1..path.len() {
            s += model.log_trans()[path[t - 1]][path[t]] + log_b[t][path[t]];
        }
        if s > best.1 {
            best = (path.to_vec(), s);
        }
    });
    best
}

fn random_stochastic(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|r| (r / total).ln()).collect()
}

fn random_mixture(rng: &mut ChaCha8Rng, dims: usize, m: usize) -> GaussianMixture {
    let w: Vec<f64> = random_stochastic(rng, m).iter().map(|l| l.exp()).collect();
    let means = (0..m).map(|_| (0..dims).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let vars = (0..m).map(|_| (0..dims).map(|_| rng.gen_range(0.3..2.0)).collect()).collect();
    GaussianMixture::new(w, means, vars).unwrap()
}

/// Random model and observation sequence for the exhaustive checks. Every
/// fifth instance has identical states and uniform probabilities so that
/// all paths tie; every third of the rest is left-to-right.
pub fn random_hmm_instance(rng: &mut ChaCha8Rng, k: usize) -> (WordHmm, FeatureMatrix) {
    let n = rng.gen_range(1..=4);
    let t = rng.gen_range(1..=6);
    let dims = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=2);
    let model = if k % 5 == 4 {
        let g = random_mixture(rng, dims, m);
        let u = -(n as f64).ln();
        WordHmm::new("tie", vec![u; n], vec![vec![u; n]; n], vec![g; n]).unwrap()
    } else if k % 3 == 2 {
        let emissions = (0..n).map(|_| random_mixture(rng, dims, m)).collect();
        WordHmm::left_to_right("ltr", rng.gen_range(0.2..0.9), emissions).unwrap()
    } else {
        let start = random_stochastic(rng, n);
        let trans = (0..n).map(|_| random_stochastic(rng, n)).collect();
        let emissions = (0..n).map(|_| random_mixture(rng, dims, m)).collect();
        WordHmm::new("rand", start, trans, emissions).unwrap()
    };
    let data = (0..t * dims).map(|_| rng.gen_range(-2.5..2.5)).collect();
    (model, FeatureMatrix::new(dims, data).unwrap())
}

/// Analytic vs central-difference gradient: the largest relative error,
/// using `max(|a|, |n|, 1e-7)` as denominator so that gradients that are
/// zero up to rounding do not divide by zero.
pub fn gradient_check(model: &MlpModel, x: &[f64], label: usize, h: f64) -> f64 {
    let (_, analytic) = backprop(model, x, label).unwrap();
    let loss_at = |m: &MlpModel| {
        let cache = forward_pass(m, x).unwrap();
        softmax_cross_entropy(cache.logits(), label).unwrap().0
    };
    let mut probe = model.clone();
    let mut worst: f64 = 0.0;
    for (i, a) in analytic.iter().enumerate() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = loss_at(&probe);
        probe.params_mut()[i] = orig - h;
        let down = loss_at(&probe);
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    worst
}

pub fn random_net(rng: &mut ChaCha8Rng, sizes: Vec<usize>) -> MlpModel {
    let labels = (0..*sizes.last().unwrap()).map(|c| format!("c{c}")).collect();
    let params = (0..MlpModel::param_count(&sizes)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let input = sizes[0];
    MlpModel::new(sizes, params, labels, input, Standardizer::identity(1)).unwrap()
}

// ---------------------------------------------------------------- corpora

/// Enhanced clips of a synthetic corpus, optionally with pitch-shifted
/// clones, turned into features.
pub fn synthetic_features(spec: &SynthSpec, config: &ToolConfig, augment: bool) -> FeatureSet {
    let (manifest, clips) = generate(spec, "synthetic");
    let prepared: Vec<AudioClip> = clips.iter().map(|c| enhance(c, &config.audio, None).unwrap()).collect();
    let (manifest, clips) = if augment {
        augment_corpus(&manifest, &prepared, &config.augmentation.semitones).unwrap()
    } else {
        (manifest, prepared)
    };
    FeatureSet::from_clips(manifest, &clips, &config.features, None).unwrap()
}

/// 5 words, 10 speakers, 4 takes each.
pub fn end_to_end_spec() -> SynthSpec {
    SynthSpec {
        takes: 4,
        ..SynthSpec::default()
    }
}

/// 10 words, 12 speakers spread over ±6 semitones, 2 takes, 10 dB SNR.
pub fn augmentation_spec() -> SynthSpec {
    SynthSpec {
        n_words: 10,
        n_speakers: 12,
        takes: 2,
        snr_db: 10.0,
        take_jitter: 0.1,
        pitch_spread: 6.0,
        ..SynthSpec::default()
    }
}

/// 10 words with 36 utterances each (12 speakers x 3 takes), 5 dB SNR.
pub fn sweep_spec() -> SynthSpec {
    SynthSpec {
        n_words: 10,
        n_speakers: 12,
        takes: 3,
        snr_db: 5.0,
        take_jitter: 0.15,
        pitch_spread: 6.0,
        ..SynthSpec::default()
    }
}

// --------------------------------------------------------------- criteria

pub fn criterion_1_dsp() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_bin: f64 = 0.0;
    let mut worst_parseval: f64 = 0.0;
    for _ in 0..100 {
        let len: usize = rng.gen_range(1..=512);
        let n = len.next_power_of_two();
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = dft(&x, n).unwrap();
        let slow = direct_dft(&x, n);
        for (f, (re, im)) in fast.iter().zip(&slow) {
            worst_bin = worst_bin.max((f.re - re).abs()).max((f.im - im).abs());
        }
        let time_energy: f64 = x.iter().map(|v| v * v).sum();
        let freq_energy: f64 = fast.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
        worst_parseval = worst_parseval.max((time_energy - freq_energy).abs() / time_energy);
    }
    Check::new(
        worst_bin < 1e-9 && worst_parseval < 1e-6,
        format!("max bin error {worst_bin:.2e}, max Parseval relative error {worst_parseval:.2e} over 100 frames"),
    )
}

pub fn criterion_2_mfcc() -> Check {
    let settings = FeatureSettings::default();
    let ex = MfccExtractor::new(&settings, 16_000).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let base: Vec<f64> = (0..16_000)
        .map(|t| 0.4 * (TAU * 440.0 * t as f64 / 16_000.0).sin() + rng.gen_range(-0.3..0.3))
        .collect();
    let reference_fm = ex.extract(&AudioClip::mono(base.clone(), 16_000)).unwrap();
    let mut worst_scale: f64 = 0.0;
    for gain in [0.5, 0.1, 0.01] {
        let scaled: Vec<f64> = base.iter().map(|v| v * gain).collect();
        let fm = ex.extract(&AudioClip::mono(scaled, 16_000)).unwrap();
        for (a, b) in fm.frames().zip(reference_fm.frames()) {
            for k in 1..13 {
                worst_scale = worst_scale.max((a[k] - b[k]).abs());
            }
        }
    }
    let silent = ex.extract(&AudioClip::mono(vec![0.0; 8_000], 16_000)).unwrap();
    // Every filter hits the log floor; the orthonormal DCT of a constant
    // vector keeps only c0 = sqrt(M) * ln(floor).
    let c0 = (settings.n_filters as f64).sqrt() * settings.log_floor.ln();
    let silent_ok = silent
        .frames()
        .all(|f| (f[0] - c0).abs() < 1e-9 && f[1..].iter().all(|c| c.abs() < 1e-9));
    let again = ex.extract(&AudioClip::mono(base, 16_000)).unwrap();
    let deterministic = again == reference_fm;
    Check::new(
        worst_scale < 1e-6 && silent_ok && deterministic,
        format!(
            "c1..c12 max change under scaling {worst_scale:.2e}; silent frames constant at c0 = {c0:.4}: {silent_ok}; repeat extraction identical: {deterministic}"
        ),
    )
}

pub fn criterion_3_hmm() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut path_mismatches = 0;
    for k in 0..50 {
        let (model, obs) = random_hmm_instance(&mut rng, k);
        let fwd = model.forward_log_likelihood(&obs).unwrap();
        let brute = exhaustive_likelihood(&model, &obs);
        worst = worst.max((fwd - brute).abs() / brute.abs().max(1.0));
        let vit = model.viterbi(&obs).unwrap();
        let (path, score) = exhaustive_viterbi(&model, &obs);
        worst = worst.max((vit.log_prob - score).abs() / score.abs().max(1.0));
        if vit.states != path {
            path_mismatches += 1;
        }
    }
    Check::new(
        worst < 1e-8 && path_mismatches == 0,
        format!("50 instances: max relative error {worst:.2e}, Viterbi path mismatches {path_mismatches}"),
    )
}

pub fn criterion_4_em() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_drop: f64 = 0.0;
    let mut iterations = 0;
    for _ in 0..20 {
        let dims = rng.gen_range(1..=3);
        let settings = HmmSettings {
            n_states: rng.gen_range(2..=4),
            n_mixtures: rng.gen_range(1..=3),
            ..HmmSettings::default()
        };
        let centers: Vec<Vec<f64>> = (0..settings.n_states)
            .map(|_| (0..dims).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let seqs: Vec<FeatureMatrix> = (0..rng.gen_range(3..=5))
            .map(|_| {
                let len = rng.gen_range(10..=25);
                let data = (0..len)
                    .flat_map(|t| {
                        let c = &centers[t * settings.n_states / len];
                        c.iter().map(|m| m + rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()
                    })
                    .collect();
                FeatureMatrix::new(dims, data).unwrap()
            })
            .collect();
        let refs: Vec<&FeatureMatrix> = seqs.iter().collect();
        let (_, trace) = train_word_hmm("w", &refs, &settings).unwrap();
        iterations += trace.iterations;
        for w in trace.log_likelihoods.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    Check::new(
        worst_drop <= 1e-6,
        format!("20 problems, {iterations} EM iterations, largest log-likelihood decrease {worst_drop:.2e}"),
    )
}

pub fn criterion_5_dnn() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for k in 0..25 {
        let sizes = if k == 0 {
            vec![10, 8, 4]
        } else {
            let mut s = vec![rng.gen_range(3..=10)];
            for _ in 0..rng.gen_range(1..=2) {
                s.push(rng.gen_range(2..=8));
            }
            s.push(rng.gen_range(2..=5));
            s
        };
        let classes = *sizes.last().unwrap();
        let model = random_net(&mut rng, sizes);
        let x: Vec<f64> = (0..model.layer_sizes()[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(gradient_check(&model, &x, rng.gen_range(0..classes), 1e-5));
    }
    let mut adam_dev: f64 = 0.0;
    for _ in 0..10 {
        let g = rng.gen_range(1e-3..10.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mut p = [0.0];
        let mut state = AdamState::with_defaults(1);
        adam_step(&mut p, &[g], &mut state).unwrap();
        adam_dev = adam_dev.max((p[0].abs() - 0.001).abs());
    }
    Check::new(
        worst < 1e-4 && adam_dev < 1e-8,
        format!("25 nets, max gradient relative error {worst:.2e}; Adam first step deviates from lr=0.001 by at most {adam_dev:.2e}"),
    )
}

pub fn criterion_6_end_to_end() -> Check {
    let config = ToolConfig::default();
    let set = synthetic_features(&end_to_end_spec(), &config, false);
    let report = run_experiment(
        &set,
        &ExperimentSpec {
            classifier: ClassifierKind::Hmm,
            mode: SplitMode::SpeakerDependent,
            augment: false,
            params: SplitParams::default(),
            seeds: config.seeds.clone(),
        },
        &config,
    )
    .unwrap();
    let all: Vec<usize> = (0..set.manifest().len()).collect();
    let dnn = TrainedModel::train(ClassifierKind::Dnn, &set.labeled(&all), &config, 1).unwrap();
    let (correct, _) = dnn.evaluate(&set, &all).unwrap();
    let dnn_acc = 100.0 * correct as f64 / all.len() as f64;
    Check::new(
        report.mean_accuracy >= 90.0 && dnn_acc >= 95.0,
        format!(
            "speaker-dependent HMM-GMM {:.2} % (need >= 90), DNN training-set {dnn_acc:.2} % (need >= 95)",
            report.mean_accuracy
        ),
    )
}

pub fn criterion_7_augmentation() -> Check {
    let config = ToolConfig::default();
    let set = synthetic_features(&augmentation_spec(), &config, true);
    let params = SplitParams {
        train_speakers: 2,
        test_speakers: 1,
        ..SplitParams::default()
    };
    let mut lines = Vec::new();
    let mut any = false;
    for classifier in [ClassifierKind::Hmm, ClassifierKind::Dnn] {
        let mean = |augment| {
            let spec = ExperimentSpec {
                classifier,
                mode: SplitMode::SpeakerIndependent,
                augment,
                params: params.clone(),
                seeds: config.seeds.clone(),
            };
            run_experiment(&set, &spec, &config).unwrap().mean_accuracy
        };
        let (without, with) = (mean(false), mean(true));
        any |= with >= without;
        lines.push(format!("{classifier} {without:.2} -> {with:.2} %"));
    }
    Check::new(any, format!("speaker-independent, 3 seeds: {}", lines.join(", ")))
}

/// Writes a synthetic corpus and runs synth, prepare and featurize into
/// `root`, returning the featurized manifest.
pub fn featurized_corpus(spec: &SynthSpec, config: &ToolConfig, root: &Path) -> PathBuf {
    workflow::cmd_synth(spec, &root.join("synth")).unwrap();
    let p = workflow::cmd_prepare(&root.join("synth/manifest.csv"), &root.join("prepared"), config).unwrap();
    assert!(p.is_success());
    let f = workflow::cmd_featurize(&root.join("prepared/manifest.csv"), &root.join("features"), config).unwrap();
    assert!(f.is_success());
    root.join("features/manifest.csv")
}

pub fn criterion_8_sweep() -> Check {
    let config = ToolConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let manifest = featurized_corpus(&sweep_spec(), &config, dir.path());
    let out = dir.path().join("sweep");
    workflow::cmd_sweep(
        &manifest,
        &out,
        ClassifierKind::Hmm,
        SweepMode::Pooled,
        &TABLE_II_LEVELS,
        &config.seeds,
        &config,
    )
    .unwrap();
    let report: SweepReport = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    let columns: Vec<(usize, usize, usize)> = report.rows.iter().map(|r| (r.total, r.test, r.train)).collect();
    let printed: Vec<(usize, usize, usize)> = TABLE_II_LEVELS.iter().map(|l| (l.total, l.test, l.train)).collect();
    let accs: Vec<String> = report.rows.iter().map(|r| format!("{:.2}", r.accuracy)).collect();
    Check::new(
        columns == printed && report.non_decreasing_steps >= 4,
        format!(
            "{} rows {:?}, accuracies {:?}, non-decreasing in {} of {} steps",
            report.rows.len(),
            columns,
            accs,
            report.non_decreasing_steps,
            report.steps
        ),
    )
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(base: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

pub fn small_config() -> ToolConfig {
    let mut config = ToolConfig::default();
    config.dnn.hidden = vec![32, 16];
    config.dnn.epochs = 5;
    config
}

pub fn small_spec() -> SynthSpec {
    SynthSpec {
        n_words: 3,
        n_speakers: 4,
        takes: 3,
        ..SynthSpec::default()
    }
}

/// Runs every command once into `root`.
pub fn run_all_commands(root: &Path, config: &ToolConfig) {
    let features = featurized_corpus(&small_spec(), config, root);
    let ok = |o: workflow::Outcome| assert!(o.is_success(), "{:?}", o.failures);
    ok(workflow::cmd_augment(&root.join("prepared/manifest.csv"), &root.join("augmented"), &[-2.0, 2.0], config).unwrap());
    ok(workflow::cmd_featurize(&root.join("augmented/manifest.csv"), &root.join("aug_features"), config).unwrap());
    let aug_features = root.join("aug_features/manifest.csv");
    let mut reports = Vec::new();
    for (name, classifier) in [("hmm", ClassifierKind::Hmm), ("dnn", ClassifierKind::Dnn)] {
        let opts = RunOptions {
            classifier,
            mode: SplitMode::SpeakerIndependent,
            augment: true,
            seeds: vec![1, 2],
        };
        let model_dir = root.join(format!("model_{name}"));
        ok(workflow::cmd_train(&aug_features, &model_dir, &opts, config).unwrap());
        ok(workflow::cmd_eval(&aug_features, &root.join(format!("eval_model_{name}")), Some(&model_dir.join("model.json")), &opts, config).unwrap());
        let exp_dir = root.join(format!("eval_{name}"));
        ok(workflow::cmd_eval(&aug_features, &exp_dir, None, &opts, config).unwrap());
        reports.push(exp_dir.join("report.json"));
    }
    let levels = isoword::eval::parse_levels("4:1:3,6:2:4").unwrap();
    ok(workflow::cmd_sweep(&features, &root.join("sweep"), ClassifierKind::Hmm, SweepMode::Pooled, &levels, &[1, 2], config).unwrap());
    ok(workflow::cmd_report(&reports, &root.join("report")).unwrap());
}

pub fn criterion_9_determinism() -> Check {
    let config = small_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_all_commands(a.path(), &config);
    run_all_commands(b.path(), &config);
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    let differing: Vec<&String> = sa.keys().filter(|k| sa.get(*k) != sb.get(*k)).collect();
    let same_files = sa.len() == sb.len() && sa.keys().eq(sb.keys());
    Check::new(
        same_files && differing.is_empty(),
        format!(
            "{} artifacts from synth, prepare, augment, featurize, train, eval, sweep and report; {} differ{}",
            sa.len(),
            differing.len(),
            differing.first().map(|d| format!(" (first: {d})")).unwrap_or_default()
        ),
    )
}

pub fn criterion_10_report() -> Check {
    let rows: Vec<ReportRow> = reference::TABLE_I
        .iter()
        .map(|c| ReportRow {
            classifier: c.classifier,
            mode: c.mode,
            augmented: c.augmented,
            accuracy: c.accuracy,
        })
        .collect();
    let bundle = isoword::eval::emit_report(&rows);
    let find = |k: ClassifierKind| bundle.deltas.iter().find(|d| d.classifier == k).cloned();
    let (Some(dnn), Some(hmm)) = (find(ClassifierKind::Dnn), find(ClassifierKind::Hmm)) else {
        return Check::new(false, "missing augmentation deltas");
    };
    let dnn_ok = dnn.delta == 7.65 && dnn.note.is_none();
    let hmm_flagged = hmm.delta == 6.21 && hmm.printed == Some(6.12) && hmm.note.is_some();
    Check::new(
        dnn_ok && hmm_flagged,
        format!(
            "DNN {:.2} - {:.2} = {:.2}; HMM-GMM {:.2} - {:.2} = {:.2}, flagged against printed {:?}",
            dnn.with, dnn.without, dnn.delta, hmm.with, hmm.without, hmm.delta, hmm.printed
        ),
    )
}
