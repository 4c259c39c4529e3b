//! Synthetic isolated-word corpus for tests and demonstrations.
//!
//! Each word is a fixed sequence of segments, each segment a pair of
//! formant-like tones. A speaker scales every frequency by a pitch factor and
//! the level by a gain; each take jitters the timing and adds white noise.

use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::audio::AudioClip;
use crate::eval::{DatasetManifest, ManifestEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_words: usize,
    pub n_speakers: usize,
    pub takes: u32,
    pub sample_rate: u32,
    /// Signal to noise ratio of the added white noise.
    pub snr_db: f64,
    /// Speaker pitch factors are spread evenly over ± this many semitones.
    pub pitch_spread: f64,
    /// Relative jitter applied to segment durations and tone frequencies per take.
    pub take_jitter: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_words: 5,
            n_speakers: 10,
            takes: 3,
            sample_rate: 16_000,
            snr_db: 20.0,
            pitch_spread: 2.0,
            take_jitter: 0.05,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    f1: f64,
    f2: f64,
    secs: f64,
}

fn word_pattern(seed: u64, word: usize) -> Vec<Segment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(word as u64 + 1)));
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.gen_range(lo.ln()..hi.ln())).exp();
    (0..3)
        .map(|_| Segment {
            f1: log_uniform(&mut rng, 250.0, 900.0),
            f2: log_uniform(&mut rng, 1000.0, 2800.0),
            secs: rng.gen_range(0.12..0.2),
        })
        .collect()
}

pub fn speaker_name(s: usize) -> String {
    format!("spk{s:02}")
}

pub fn word_name(w: usize) -> String {
    format!("word{w}")
}

/// Pitch factor of speaker `s`: `2^(u/12)` with `u` evenly spaced over
/// `[-pitch_spread, pitch_spread]`.
pub fn speaker_pitch(spec: &SynthSpec, s: usize) -> f64 {
    let u = if spec.n_speakers < 2 {
        0.0
    } else {
        -spec.pitch_spread + 2.0 * spec.pitch_spread * s as f64 / (spec.n_speakers - 1) as f64
    };
    2f64.powf(u / 12.0)
}

/// One utterance.
pub fn utterance(spec: &SynthSpec, word: usize, speaker: usize, take: u32) -> AudioClip {
    let sr = spec.sample_rate as f64;
    let pattern = word_pattern(spec.seed, word);
    let pitch = speaker_pitch(spec, speaker);
    let mut rng = ChaCha8Rng::seed_from_u64(
        spec.seed
            .wrapping_mul(31)
            .wrapping_add((word as u64) << 40 | (speaker as u64) << 20 | take as u64),
    );
    let gain = 0.25 + 0.5 * ChaCha8Rng::seed_from_u64(spec.seed + 1000 + speaker as u64).gen::<f64>();
    let lead = (0.08 * sr) as usize;
    let mut samples = vec![0.0; lead];
    let fade = (0.02 * sr) as usize;
    let (mut ph1, mut ph2) = (0.0f64, 0.0f64);
    for seg in pattern {
        let mut jitter = |x: f64| x * (1.0 + spec.take_jitter * rng.gen_range(-1.0..1.0));
        let n = (jitter(seg.secs) * sr) as usize;
        let f1 = jitter(seg.f1) * pitch;
        let f2 = jitter(seg.f2) * pitch;
        for i in 0..n {
            let ramp = (i.min(n - 1 - i) as f64 / fade as f64).min(1.0);
            let env = 0.5 - 0.5 * (std::f64::consts::PI * ramp).cos();
            samples.push(gain * env * (ph1.sin() + 0.5 * ph2.sin()) / 1.5);
            ph1 = (ph1 + TAU * f1 / sr) % TAU;
            ph2 = (ph2 + TAU * f2 / sr) % TAU;
        }
    }
    samples.extend(std::iter::repeat(0.0).take(lead));
    let rms = (samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64).sqrt();
    let noise = Normal::new(0.0, rms / 10f64.powf(spec.snr_db / 20.0)).expect("finite noise level");
    for x in &mut samples {
        *x += noise.sample(&mut rng);
    }
    AudioClip::mono(samples, spec.sample_rate)
}

/// Every (speaker, word, take) utterance with a manifest whose paths are
/// `<root>/<speaker>/<word>_<take>.wav`.
pub fn generate(spec: &SynthSpec, root: impl Into<PathBuf>) -> (DatasetManifest, Vec<AudioClip>) {
    let root = root.into();
    let mut entries = Vec::new();
    let mut clips = Vec::new();
    for s in 0..spec.n_speakers {
        for w in 0..spec.n_words {
            for t in 0..spec.takes {
                let (speaker, word) = (speaker_name(s), word_name(w));
                entries.push(ManifestEntry::new(
                    root.join(&speaker).join(format!("{word}_{t}.wav")),
                    &speaker,
                    &word,
                    t,
                ));
                clips.push(utterance(spec, w, s, t));
            }
        }
    }
    let manifest = DatasetManifest::from_entries(entries).expect("generated keys are unique");
    (manifest, clips)
}
