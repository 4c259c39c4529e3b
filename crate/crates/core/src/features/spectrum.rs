use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{FeatureError, Result};

fn check_size(len: usize, n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(FeatureError::InvalidFftSize(n));
    }
    if len > n {
        return Err(FeatureError::FrameTooLong { len, n });
    }
    Ok(())
}

/// Full `n`-point discrete Fourier transform of a real frame, zero-padded
/// to `n`: `X[k] = sum_t x[t] exp(-2 pi i t k / n)`, unscaled.
pub fn dft(frame: &[f64], n: usize) -> Result<Vec<Complex64>> {
    check_size(frame.len(), n)?;
    let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf)
}

/// Inverse of [`dft`], including the `1/n` factor. Returns the real part.
pub fn inverse_dft(spectrum: &[Complex64]) -> Result<Vec<f64>> {
    let n = spectrum.len();
    check_size(n, n)?;
    let mut buf = spectrum.to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    Ok(buf.iter().map(|c| c.re / n as f64).collect())
}

/// Power estimate `P[k] = |X[k]|^2 / n` for bins `0..=n/2`.
pub fn periodogram(spectrum: &[Complex64], n: usize) -> Vec<f64> {
    spectrum
        .iter()
        .take(n / 2 + 1)
        .map(|c| c.norm_sqr() / n as f64)
        .collect()
}
