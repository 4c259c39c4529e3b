//! Short-time Fourier analysis and weighted overlap-add resynthesis shared
//! by the denoiser and the phase vocoder. Spectra are stored as the
//! non-negative half, `n / 2 + 1` bins.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct RealFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RealFft {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Half spectrum of `frame` zero-padded to `n`.
    pub(crate) fn forward_half(&self, frame: &[f64]) -> Vec<Complex64> {
        debug_assert!(frame.len() <= self.n);
        let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(self.n, Complex64::new(0.0, 0.0));
        self.forward.process(&mut buf);
        buf.truncate(self.n / 2 + 1);
        buf
    }

    /// Real signal from a half spectrum, including the 1/n scale.
    pub(crate) fn inverse_half(&self, half: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(half.len(), self.n / 2 + 1);
        let mut buf = Vec::with_capacity(self.n);
        buf.extend_from_slice(half);
        for k in (1..self.n - half.len() + 1).rev() {
            buf.push(half[k].conj());
        }
        // DC and Nyquist of a real signal have no imaginary part.
        buf[0].im = 0.0;
        if self.n % 2 == 0 {
            buf[self.n / 2].im = 0.0;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Periodic Hann window; its shifted copies at hop `n / 2` sum to one.
pub(crate) fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Square root of the periodic Hann window. Used for both analysis and
/// synthesis at hop `n / 2`, where its squares sum to one.
pub(crate) fn sqrt_hann(n: usize) -> Vec<f64> {
    hann(n).into_iter().map(f64::sqrt).collect()
}

/// Frame layout: frame `m` starts at sample `m * hop - pad`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Framing {
    pub hop: usize,
    pub pad: usize,
}

impl Framing {
    pub(crate) fn frame_count(&self, len: usize) -> usize {
        // Frames until the start passes the end of the signal.
        (len + self.pad).div_ceil(self.hop).max(1)
    }
}

pub(crate) fn analyze(
    fft: &RealFft,
    signal: &[f64],
    window: &[f64],
    framing: Framing,
) -> Vec<Vec<Complex64>> {
    let n = window.len();
    let count = framing.frame_count(signal.len());
    let mut frame = vec![0.0; n];
    (0..count)
        .map(|m| {
            let start = (m * framing.hop) as isize - framing.pad as isize;
            for (i, slot) in frame.iter_mut().enumerate() {
                let idx = start + i as isize;
                *slot = if idx >= 0 && (idx as usize) < signal.len() {
                    signal[idx as usize] * window[i]
                } else {
                    0.0
                };
            }
            fft.forward_half(&frame)
        })
        .collect()
}

/// Weighted overlap-add, normalized by the accumulated squared window.
pub(crate) fn synthesize(
    fft: &RealFft,
    frames: &[Vec<Complex64>],
    window: &[f64],
    framing: Framing,
    out_len: usize,
) -> Vec<f64> {
    let n = window.len();
    let mut out = vec![0.0; out_len];
    let mut norm = vec![0.0; out_len];
    for (m, spectrum) in frames.iter().enumerate() {
        let start = (m * framing.hop) as isize - framing.pad as isize;
        let time = fft.inverse_half(spectrum);
        for i in 0..n {
            let idx = start + i as isize;
            if idx >= 0 && (idx as usize) < out_len {
                out[idx as usize] += time[i] * window[i];
                norm[idx as usize] += window[i] * window[i];
            }
        }
    }
    for (o, w) in out.iter_mut().zip(&norm) {
        if *w > 1e-8 {
            *o /= w;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_hann_squares_sum_to_one() {
        let w = sqrt_hann(512);
        for i in 0..256 {
            assert!((w[i] * w[i] + w[i + 256] * w[i + 256] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn analysis_synthesis_is_identity() {
        let signal: Vec<f64> = (0..3000).map(|i| ((i * 7919) % 101) as f64 / 101.0 - 0.5).collect();
        let fft = RealFft::new(256);
        let w = sqrt_hann(256);
        let framing = Framing { hop: 128, pad: 128 };
        let frames = analyze(&fft, &signal, &w, framing);
        let out = synthesize(&fft, &frames, &w, framing, signal.len());
        for (a, b) in out.iter().zip(&signal) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
