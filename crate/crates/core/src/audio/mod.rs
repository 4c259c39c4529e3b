//! Waveform container, WAV I/O and the speech-enhancement stages.
//!
//! Every stage is a pure function from one [`AudioClip`] to another. The
//! [`enhance`] function chains them in the canonical order:
//! mono merge, spectral noise subtraction, peak normalization, DC removal
//! and silence trimming.

mod denoise;
mod pipeline;
mod pitch;
mod resample;
pub(crate) mod stft;
mod wav;

pub use denoise::{estimate_noise_profile, spectral_subtract, NoiseProfile, SubtractionParams};
pub use pipeline::{enhance, enhance_with_report, EnhancementReport, EnhancementSettings, NoiseSource};
pub use pitch::{pitch_shift, time_stretch, MAX_SEMITONES};
pub use resample::{resample, resample_to_len};
pub use wav::{load_clip, read_wav, write_wav};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unreadable file {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("unsupported encoding in {path}: {reason}")]
    UnsupportedEncoding { path: PathBuf, reason: String },
    #[error("zero-length audio in {0}")]
    Empty(PathBuf),
    #[error("cannot write {path}: {reason}")]
    Unwritable { path: PathBuf, reason: String },
    #[error("clip has no samples")]
    EmptyClip,
    #[error("clip is all zeros and cannot be peak-normalized")]
    Silent,
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("noise span too short: {got} samples, need at least {need}")]
    SpanTooShort { got: usize, need: usize },
    #[error("noise span [{start}, {end}) lies outside a clip of {len} samples")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("noise profile has {got} bins but processing expects {expected}")]
    ProfileMismatch { got: usize, expected: usize },
    #[error("pitch shift of {0} semitones is outside [-12, 12]")]
    ShiftOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, AudioError>;

/// A sampled waveform. Samples are interleaved when `channels == 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    channels: u16,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32, channels: u16) -> Result<Self> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidClip("sample rate must be positive".into()));
        }
        if channels != 1 && channels != 2 {
            return Err(AudioError::InvalidClip(format!(
                "unsupported channel count {channels}"
            )));
        }
        if samples.len() % channels as usize != 0 {
            return Err(AudioError::InvalidClip(format!(
                "{} samples is not a multiple of {channels} channels",
                samples.len()
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(AudioError::InvalidClip(format!(
                "sample {bad} outside [-1, 1]"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            channels,
        })
    }

    /// Mono clip; out-of-range samples are clamped into [-1, 1].
    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Self {
        Self::from_clamped(samples, sample_rate, 1)
    }

    pub(crate) fn from_clamped(mut samples: Vec<f64>, sample_rate: u32, channels: u16) -> Self {
        debug_assert!(sample_rate > 0 && (channels == 1 || channels == 2));
        debug_assert_eq!(samples.len() % channels as usize, 0);
        for s in &mut samples {
            *s = if s.is_nan() { 0.0 } else { s.clamp(-1.0, 1.0) };
        }
        Self {
            samples,
            sample_rate,
            channels,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    /// Samples per channel.
    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, s| m.max(s.abs()))
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.samples.iter().sum::<f64>() / self.samples.len() as f64
        }
    }

    /// Splits interleaved samples into one vector per channel.
    pub(crate) fn deinterleave(&self) -> Vec<Vec<f64>> {
        let ch = self.channels as usize;
        (0..ch)
            .map(|c| self.samples.iter().skip(c).step_by(ch).copied().collect())
            .collect()
    }

    pub(crate) fn interleave(channels: &[Vec<f64>], sample_rate: u32) -> Self {
        let n = channels.iter().map(Vec::len).min().unwrap_or(0);
        let mut samples = Vec::with_capacity(n * channels.len());
        for i in 0..n {
            for ch in channels {
                samples.push(ch[i]);
            }
        }
        Self::from_clamped(samples, sample_rate, channels.len() as u16)
    }
}

/// Converts decibels relative to full scale into a linear amplitude.
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// Averages the two channels of a stereo clip. Mono input is returned as is.
pub fn to_mono(clip: &AudioClip) -> AudioClip {
    if clip.channels == 1 {
        return clip.clone();
    }
    let samples = clip
        .samples
        .chunks_exact(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect();
    AudioClip::from_clamped(samples, clip.sample_rate, 1)
}

/// Scales the clip so that its largest absolute sample sits at `target_db` dBFS.
pub fn normalize_peak(clip: &AudioClip, target_db: f64) -> Result<AudioClip> {
    if target_db > 0.0 || !target_db.is_finite() {
        return Err(AudioError::InvalidParameter(format!(
            "peak target {target_db} dBFS must be finite and <= 0"
        )));
    }
    let peak = clip.peak();
    if peak == 0.0 {
        return Err(AudioError::Silent);
    }
    let target = db_to_amplitude(target_db);
    if peak == target {
        return Ok(clip.clone());
    }
    let gain = target / peak;
    let samples = clip.samples.iter().map(|s| s * gain).collect();
    Ok(AudioClip::from_clamped(samples, clip.sample_rate, clip.channels))
}

/// Subtracts the mean sample value from every sample.
pub fn remove_dc(clip: &AudioClip) -> AudioClip {
    let mean = clip.mean();
    let samples = clip.samples.iter().map(|s| s - mean).collect();
    AudioClip::from_clamped(samples, clip.sample_rate, clip.channels)
}

/// Drops leading and trailing windows whose RMS falls below `threshold_db`.
///
/// Windows are `window_ms` long and aligned to the start of the clip; the
/// final window may be shorter. Interior windows are never touched. When
/// every window is silent the single loudest window is kept, so the result
/// is never empty for a non-empty input.
pub fn trim_silence(clip: &AudioClip, threshold_db: f64, window_ms: f64) -> Result<AudioClip> {
    if !(threshold_db < 0.0) {
        return Err(AudioError::InvalidParameter(format!(
            "silence threshold {threshold_db} dBFS must be negative"
        )));
    }
    if !(window_ms > 0.0) {
        return Err(AudioError::InvalidParameter(format!(
            "trim window {window_ms} ms must be positive"
        )));
    }
    let frames = clip.frames();
    if frames == 0 {
        return Ok(clip.clone());
    }
    let ch = clip.channels as usize;
    let window = ((window_ms * clip.sample_rate as f64 / 1000.0).round() as usize).max(1);
    let threshold = db_to_amplitude(threshold_db);

    let rms: Vec<f64> = clip
        .samples
        .chunks(window * ch)
        .map(|w| (w.iter().map(|s| s * s).sum::<f64>() / w.len() as f64).sqrt())
        .collect();
    let loud = |r: &f64| *r >= threshold;

    let (first, last) = match (rms.iter().position(loud), rms.iter().rposition(loud)) {
        (Some(first), Some(last)) => (first, last),
        _ => {
            // Degenerate case: keep the loudest window (lowest index on ties).
            let best = rms
                .iter()
                .enumerate()
                .fold(0, |best, (i, r)| if *r > rms[best] { i } else { best });
            (best, best)
        }
    };
    let start = first * window * ch;
    let end = ((last + 1) * window * ch).min(clip.samples.len());
    Ok(AudioClip {
        samples: clip.samples[start..end].to_vec(),
        sample_rate: clip.sample_rate,
        channels: clip.channels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, secs: f64, amp: f64, rate: u32) -> Vec<f64> {
        let n = (secs * rate as f64) as usize;
        (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect()
    }

    #[test]
    fn clip_rejects_bad_shapes() {
        assert!(AudioClip::new(vec![0.0; 3], 16000, 2).is_err());
        assert!(AudioClip::new(vec![0.0; 4], 16000, 3).is_err());
        assert!(AudioClip::new(vec![1.5], 16000, 1).is_err());
        assert!(AudioClip::new(vec![0.1], 0, 1).is_err());
    }

    #[test]
    fn mono_is_identity_on_mono() {
        let clip = AudioClip::mono(vec![0.1, -0.2, 0.3], 16000);
        assert_eq!(to_mono(&clip), clip);
    }

    #[test]
    fn mono_averages_pairs() {
        let clip = AudioClip::new(vec![0.5, -0.5, 0.5, -0.5], 16000, 2).unwrap();
        let mono = to_mono(&clip);
        assert_eq!(mono.channels(), 1);
        assert_eq!(mono.samples(), &[0.0, 0.0]);

        let clip = AudioClip::new(vec![0.2, 0.6, 0.2, 0.6], 16000, 2).unwrap();
        for s in to_mono(&clip).samples() {
            assert!((s - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn peak_normalization_hits_target() {
        let clip = AudioClip::mono(vec![0.5, -0.25, 0.1], 16000);
        let out = normalize_peak(&clip, -1.0).unwrap();
        // 10^(-1/20)
        assert!((out.peak() - 0.891_250_938_133_745_5).abs() < 1e-12);
        assert!((out.peak() - 0.891251).abs() < 1e-6);

        let again = normalize_peak(&out, -1.0).unwrap();
        for (a, b) in again.samples().iter().zip(out.samples()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn peak_normalization_rejects_silence() {
        let clip = AudioClip::mono(vec![0.0; 10], 16000);
        assert!(matches!(normalize_peak(&clip, -1.0), Err(AudioError::Silent)));
    }

    #[test]
    fn dc_removal() {
        let clip = AudioClip::mono(vec![0.3; 50], 16000);
        assert!(remove_dc(&clip).samples().iter().all(|s| s.abs() < 1e-15));

        let clip = AudioClip::mono(vec![0.1, 0.3], 16000);
        let out = remove_dc(&clip);
        assert!((out.samples()[0] + 0.1).abs() < 1e-12);
        assert!((out.samples()[1] - 0.1).abs() < 1e-12);

        // Whole number of periods: zero mean already.
        let tone = AudioClip::mono(sine(100.0, 0.1, 0.5, 16000), 16000);
        let out = remove_dc(&tone);
        for (a, b) in out.samples().iter().zip(tone.samples()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(remove_dc(&out).mean().abs() < 1e-9);
    }

    #[test]
    fn trim_removes_padding() {
        let rate = 16000;
        let mut samples = vec![0.0; rate as usize / 2];
        let tone = sine(440.0, 0.3, 0.5, rate);
        samples.extend(&tone);
        samples.extend(vec![0.0; rate as usize / 2]);
        let clip = AudioClip::mono(samples, rate);
        let out = trim_silence(&clip, -40.0, 10.0).unwrap();
        let window = 160;
        assert!(out.frames().abs_diff(tone.len()) <= window);
        // Idempotent.
        assert_eq!(trim_silence(&out, -40.0, 10.0).unwrap(), out);
    }

    #[test]
    fn trim_keeps_loud_clip() {
        let clip = AudioClip::mono(sine(440.0, 0.2, 0.5, 16000), 16000);
        // 440 Hz over 10 ms windows never dips below -40 dBFS RMS.
        assert_eq!(trim_silence(&clip, -40.0, 10.0).unwrap(), clip);
    }

    #[test]
    fn trim_all_silent_keeps_loudest_window() {
        let mut samples = vec![0.0; 1600];
        samples[900] = 1e-4;
        let clip = AudioClip::mono(samples, 16000);
        let out = trim_silence(&clip, -40.0, 10.0).unwrap();
        assert_eq!(out.frames(), 160);
        assert!(out.samples().contains(&1e-4));
    }
}
