use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::resample::resample_to_len;
use super::stft::{analyze, hann, synthesize, Framing, RealFft};
use super::{AudioClip, AudioError, Result};

pub const MAX_SEMITONES: f64 = 12.0;

const VOCODER_FFT: usize = 1024;
const VOCODER_HOP: usize = VOCODER_FFT / 4;

/// Changes duration by `factor` (2.0 doubles the length) without changing
/// pitch, using a phase vocoder with phase propagation per bin.
pub fn time_stretch(samples: &[f64], factor: f64) -> Vec<f64> {
    assert!(factor > 0.0 && factor.is_finite(), "stretch factor must be positive");
    let out_len = (samples.len() as f64 * factor).round() as usize;
    if samples.is_empty() {
        return vec![0.0; out_len];
    }
    let fft = RealFft::new(VOCODER_FFT);
    let window = hann(VOCODER_FFT);
    let framing = Framing {
        hop: VOCODER_HOP,
        pad: VOCODER_FFT / 2,
    };
    let mut frames = analyze(&fft, samples, &window, framing);
    let bins = VOCODER_FFT / 2 + 1;
    frames.push(vec![Complex64::new(0.0, 0.0); bins]);
    let available = frames.len() - 1;

    // Expected phase advance of each bin over one hop.
    let advance: Vec<f64> = (0..bins)
        .map(|k| 2.0 * PI * k as f64 * VOCODER_HOP as f64 / VOCODER_FFT as f64)
        .collect();
    let mut phase: Vec<f64> = frames[0].iter().map(|c| c.arg()).collect();

    let step = 1.0 / factor;
    let mut stretched = Vec::new();
    let mut t = 0.0;
    while t < available as f64 {
        let i = t.floor() as usize;
        let frac = t - i as f64;
        let (left, right) = (&frames[i], &frames[i + 1]);
        let column: Vec<Complex64> = (0..bins)
            .map(|k| {
                let mag = (1.0 - frac) * left[k].norm() + frac * right[k].norm();
                Complex64::from_polar(mag, phase[k])
            })
            .collect();
        for k in 0..bins {
            let delta = right[k].arg() - left[k].arg() - advance[k];
            phase[k] += advance[k] + wrap_phase(delta);
        }
        stretched.push(column);
        t += step;
    }
    synthesize(&fft, &stretched, &window, framing, out_len)
}

fn wrap_phase(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

/// Shifts pitch by `semitones` while keeping the duration: a phase-vocoder
/// stretch by `2^(semitones/12)` followed by resampling back to the
/// original length.
pub fn pitch_shift(clip: &AudioClip, semitones: f64) -> Result<AudioClip> {
    if !semitones.is_finite() || semitones.abs() > MAX_SEMITONES {
        return Err(AudioError::ShiftOutOfRange(semitones));
    }
    if semitones == 0.0 {
        return Ok(clip.clone());
    }
    let factor = 2f64.powf(semitones / 12.0);
    let channels: Vec<Vec<f64>> = clip
        .deinterleave()
        .iter()
        .map(|ch| resample_to_len(&time_stretch(ch, factor), ch.len()))
        .collect();
    Ok(AudioClip::interleave(&channels, clip.sample_rate()))
}
