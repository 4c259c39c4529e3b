use std::f64::consts::PI;

use super::{AudioClip, AudioError, Result};

/// Zero crossings of the sinc kernel on each side of the output point.
const ZERO_CROSSINGS: f64 = 16.0;

/// Resamples every channel of `clip` to `target_rate` with a Hann-windowed
/// sinc interpolator. Returns the clip unchanged when the rates match.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip> {
    if target_rate == 0 {
        return Err(AudioError::InvalidParameter("target sample rate must be positive".into()));
    }
    if clip.sample_rate() == target_rate {
        return Ok(clip.clone());
    }
    let ratio = target_rate as f64 / clip.sample_rate() as f64;
    let out_len = (clip.frames() as f64 * ratio).round() as usize;
    let channels: Vec<Vec<f64>> = clip
        .deinterleave()
        .iter()
        .map(|ch| interpolate(ch, out_len, 1.0 / ratio))
        .collect();
    Ok(AudioClip::interleave(&channels, target_rate))
}

/// Stretches or squeezes `samples` to exactly `target_len` samples, low-pass
/// filtering first when shortening.
pub fn resample_to_len(samples: &[f64], target_len: usize) -> Vec<f64> {
    if samples.is_empty() || target_len == 0 {
        return vec![0.0; target_len];
    }
    if target_len == samples.len() {
        return samples.to_vec();
    }
    interpolate(samples, target_len, samples.len() as f64 / target_len as f64)
}

/// `step` is the input distance between consecutive output samples.
fn interpolate(input: &[f64], out_len: usize, step: f64) -> Vec<f64> {
    // Cutoff relative to the input Nyquist; below 1 when decimating.
    let cutoff = (1.0 / step).min(1.0);
    let half_width = ZERO_CROSSINGS / cutoff;
    let n = input.len() as isize;
    (0..out_len)
        .map(|j| {
            let t = j as f64 * step;
            let lo = ((t - half_width).ceil() as isize).max(0);
            let hi = ((t + half_width).floor() as isize).min(n - 1);
            let mut acc = 0.0;
            for k in lo..=hi {
                let x = t - k as f64;
                acc += input[k as usize] * kernel(x, cutoff, half_width);
            }
            acc
        })
        .collect()
}

fn kernel(x: f64, cutoff: f64, half_width: f64) -> f64 {
    if x.abs() >= half_width {
        return 0.0;
    }
    let arg = PI * cutoff * x;
    let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
    let window = 0.5 + 0.5 * (PI * x / half_width).cos();
    cutoff * sinc * window
}
