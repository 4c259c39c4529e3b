use std::ops::Range;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stft::{analyze, sqrt_hann, synthesize, Framing, RealFft};
use super::{to_mono, AudioClip, AudioError, Result};

/// Mean noise magnitude per frequency bin, `fft_size / 2 + 1` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProfile {
    magnitude: Vec<f64>,
    fft_size: usize,
}

impl NoiseProfile {
    pub fn new(magnitude: Vec<f64>, fft_size: usize) -> Result<Self> {
        if magnitude.len() != fft_size / 2 + 1 {
            return Err(AudioError::ProfileMismatch {
                got: magnitude.len(),
                expected: fft_size / 2 + 1,
            });
        }
        if magnitude.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(AudioError::InvalidParameter(
                "noise magnitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            magnitude,
            fft_size,
        })
    }

    pub fn zero(fft_size: usize) -> Self {
        Self {
            magnitude: vec![0.0; fft_size / 2 + 1],
            fft_size,
        }
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    /// Bin with the largest mean magnitude (lowest index on ties).
    pub fn peak_bin(&self) -> usize {
        self.magnitude
            .iter()
            .enumerate()
            .fold(0, |best, (i, m)| if *m > self.magnitude[best] { i } else { best })
    }
}

/// Spectral subtraction settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubtractionParams {
    pub fft_size: usize,
    /// Over-subtraction factor applied to the noise magnitude.
    pub alpha: f64,
    /// Spectral floor as a fraction of the noise magnitude.
    pub beta: f64,
}

impl Default for SubtractionParams {
    fn default() -> Self {
        Self {
            fft_size: 512,
            alpha: 1.0,
            beta: 0.02,
        }
    }
}

impl SubtractionParams {
    pub fn validate(&self) -> Result<()> {
        if self.fft_size < 4 || !self.fft_size.is_power_of_two() {
            return Err(AudioError::InvalidParameter(format!(
                "fft size {} must be a power of two >= 4",
                self.fft_size
            )));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(AudioError::InvalidParameter("alpha must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(AudioError::InvalidParameter("beta must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn framing(&self) -> Framing {
        Framing {
            hop: self.fft_size / 2,
            pad: self.fft_size / 2,
        }
    }
}

/// Averages the windowed magnitude spectrum over every full frame inside
/// `span` (seconds). Stereo input is mixed down first.
pub fn estimate_noise_profile(
    clip: &AudioClip,
    span: Range<f64>,
    fft_size: usize,
) -> Result<NoiseProfile> {
    if fft_size < 4 || !fft_size.is_power_of_two() {
        return Err(AudioError::InvalidParameter(format!(
            "fft size {fft_size} must be a power of two >= 4"
        )));
    }
    let mono = to_mono(clip);
    let rate = mono.sample_rate() as f64;
    let start = (span.start.max(0.0) * rate).round() as usize;
    let end = (span.end * rate).round() as usize;
    if span.start < 0.0 || end > mono.frames() || start > end {
        return Err(AudioError::SpanOutOfRange {
            start,
            end,
            len: mono.frames(),
        });
    }
    let region = &mono.samples()[start..end];
    if region.len() < fft_size {
        return Err(AudioError::SpanTooShort {
            got: region.len(),
            need: fft_size,
        });
    }

    let fft = RealFft::new(fft_size);
    let window = sqrt_hann(fft_size);
    let hop = fft_size / 2;
    let count = (region.len() - fft_size) / hop + 1;
    let mut sum = vec![0.0; fft_size / 2 + 1];
    let mut frame = vec![0.0; fft_size];
    for m in 0..count {
        let chunk = &region[m * hop..m * hop + fft_size];
        for ((f, x), w) in frame.iter_mut().zip(chunk).zip(&window) {
            *f = x * w;
        }
        for (s, c) in sum.iter_mut().zip(fft.forward_half(&frame)) {
            *s += c.norm();
        }
    }
    let magnitude = sum.into_iter().map(|s| s / count as f64).collect();
    NoiseProfile::new(magnitude, fft_size)
}

/// Subtracts a stationary noise magnitude from every short-time frame.
///
/// Per bin the new magnitude is `max(|X| - alpha * N, beta * N)`, capped at
/// `|X|` so no bin ever gains energy; the original phase is kept. Frames use
/// a square-root Hann window at 50% overlap for both analysis and synthesis,
/// so a zero profile reconstructs the input exactly and the output length
/// equals the input length.
pub fn spectral_subtract(
    clip: &AudioClip,
    profile: &NoiseProfile,
    params: &SubtractionParams,
) -> Result<AudioClip> {
    params.validate()?;
    if profile.fft_size != params.fft_size {
        return Err(AudioError::ProfileMismatch {
            got: profile.fft_size,
            expected: params.fft_size,
        });
    }
    let n = params.fft_size;
    let fft = RealFft::new(n);
    let window = sqrt_hann(n);
    let framing = params.framing();

    let channels: Vec<Vec<f64>> = clip
        .deinterleave()
        .iter()
        .map(|signal| {
            let mut frames = analyze(&fft, signal, &window, framing);
            for frame in &mut frames {
                for (bin, noise) in frame.iter_mut().zip(&profile.magnitude) {
                    *bin = suppress(*bin, *noise, params.alpha, params.beta);
                }
            }
            synthesize(&fft, &frames, &window, framing, signal.len())
        })
        .collect();
    Ok(AudioClip::interleave(&channels, clip.sample_rate()))
}

fn suppress(bin: Complex64, noise: f64, alpha: f64, beta: f64) -> Complex64 {
    let mag = bin.norm();
    if mag == 0.0 {
        return bin;
    }
    let target = (mag - alpha * noise).max(beta * noise).min(mag);
    bin * (target / mag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn tone(freq: f64, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / 16000.0).sin())
            .collect()
    }

    fn noise(n: usize, amp: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| amp * (rng.gen::<f64>() * 2.0 - 1.0)).collect()
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    /// Independent oracle: direct DFT magnitude of one Hann-weighted frame.
    fn direct_dft_argmax(x: &[f64]) -> usize {
        let n = x.len();
        let w = sqrt_hann(n);
        (0..=n / 2)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = -2.0 * PI * (k * t) as f64 / n as f64;
                    re += v * w[t] * a.cos();
                    im += v * w[t] * a.sin();
                }
                (k, (re * re + im * im).sqrt())
            })
            .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best })
            .0
    }

    #[test]
    fn zero_span_gives_zero_profile() {
        let clip = AudioClip::mono(vec![0.0; 4000], 16000);
        let p = estimate_noise_profile(&clip, 0.0..0.1, 512).unwrap();
        assert!(p.magnitude().iter().all(|m| *m == 0.0));
    }

    #[test]
    fn sine_profile_peaks_at_tone_bin() {
        let clip = AudioClip::mono(tone(1000.0, 8000, 0.5), 16000);
        let p = estimate_noise_profile(&clip, 0.0..0.5, 512).unwrap();
        let expected = direct_dft_argmax(&clip.samples()[..512]);
        assert_eq!(expected, 32); // 1000 Hz * 512 / 16000
        assert_eq!(p.peak_bin(), expected);
    }

    #[test]
    fn short_span_is_rejected() {
        let clip = AudioClip::mono(vec![0.0; 4000], 16000);
        assert!(matches!(
            estimate_noise_profile(&clip, 0.0..0.01, 512),
            Err(AudioError::SpanTooShort { .. })
        ));
        assert!(matches!(
            estimate_noise_profile(&clip, 0.1..0.5, 512),
            Err(AudioError::SpanOutOfRange { .. })
        ));
    }

    #[test]
    fn zero_profile_reconstructs_input() {
        let x: Vec<f64> = tone(440.0, 5000, 0.4)
            .iter()
            .zip(noise(5000, 0.1, 3))
            .map(|(a, b)| a + b)
            .collect();
        let clip = AudioClip::mono(x.clone(), 16000);
        let out = spectral_subtract(&clip, &NoiseProfile::zero(512), &SubtractionParams::default())
            .unwrap();
        assert_eq!(out.frames(), clip.frames());
        let diff: Vec<f64> = out.samples().iter().zip(&x).map(|(a, b)| a - b).collect();
        assert!(rms(&diff) < 1e-6);
    }

    #[test]
    fn subtraction_improves_snr() {
        let n = 16000;
        let clean = tone(500.0, n, 0.3);
        let hiss = noise(n + 4000, 0.1, 11);
        let mut noisy: Vec<f64> = hiss[..4000].to_vec();
        noisy.extend(clean.iter().zip(&hiss[4000..]).map(|(a, b)| a + b));
        let clip = AudioClip::mono(noisy, 16000);
        let profile = estimate_noise_profile(&clip, 0.0..0.25, 512).unwrap();
        let out = spectral_subtract(&clip, &profile, &SubtractionParams::default()).unwrap();

        let snr = |sig: &[f64]| {
            let err: Vec<f64> = sig.iter().zip(&clean).map(|(a, b)| a - b).collect();
            20.0 * (rms(&clean) / rms(&err)).log10()
        };
        let before = snr(&clip.samples()[4000..]);
        let after = snr(&out.samples()[4000..]);
        assert!(after > before, "snr {before} -> {after}");
    }

    #[test]
    fn strong_profile_hits_floor() {
        let x = tone(1000.0, 4096, 0.2);
        let clip = AudioClip::mono(x.clone(), 16000);
        let measured = estimate_noise_profile(&clip, 0.0..0.256, 512).unwrap();
        // Noise estimate equal to the signal itself: every bin drops to beta * N.
        let params = SubtractionParams::default();
        let out = spectral_subtract(&clip, &measured, &params).unwrap();
        let fft = RealFft::new(512);
        let w = sqrt_hann(512);
        let mut frame = vec![0.0; 512];
        let start = 1024;
        for i in 0..512 {
            frame[i] = out.samples()[start + i] * w[i];
        }
        let spec = fft.forward_half(&frame);
        let k = measured.peak_bin();
        let got = spec[k].norm();
        let floor = params.beta * measured.magnitude()[k];
        assert!(got > 0.0);
        assert!((got - floor).abs() / floor < 0.05, "got {got}, floor {floor}");
    }

    #[test]
    fn never_adds_energy() {
        let x: Vec<f64> = noise(6000, 0.2, 5);
        let clip = AudioClip::mono(x, 16000);
        let big = NoiseProfile::new(vec![10.0; 257], 512).unwrap();
        let params = SubtractionParams {
            fft_size: 512,
            alpha: 0.5,
            beta: 1.0,
        };
        let out = spectral_subtract(&clip, &big, &params).unwrap();
        let e_in: f64 = clip.samples().iter().map(|s| s * s).sum();
        let e_out: f64 = out.samples().iter().map(|s| s * s).sum();
        assert!(e_out <= e_in * (1.0 + 1e-12));
    }

    #[test]
    fn mismatched_profile_is_rejected() {
        let clip = AudioClip::mono(vec![0.1; 1000], 16000);
        assert!(spectral_subtract(&clip, &NoiseProfile::zero(256), &SubtractionParams::default())
            .is_err());
    }
}
