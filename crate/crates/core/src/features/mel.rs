use serde::{Deserialize, Serialize};

use super::{FeatureError, Result};

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular filters spaced evenly on the mel scale.
///
/// Filter `i` rises linearly from bin `edges[i]` to a peak of 1.0 at
/// `edges[i + 1]` and falls back to zero at `edges[i + 2]`, so neighbours
/// cross at half height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MelFilterbank {
    n_filters: usize,
    fft_size: usize,
    sample_rate: u32,
    f_low: f64,
    f_high: f64,
    /// `n_filters + 2` FFT bin indices: lower edge, centers, upper edge.
    edges: Vec<usize>,
    /// Row-major `n_filters x (fft_size / 2 + 1)`.
    weights: Vec<f64>,
}

/// Builds `n_filters` filters between 0 Hz and the Nyquist frequency.
pub fn build_filterbank(n_filters: usize, fft_size: usize, sample_rate: u32) -> Result<MelFilterbank> {
    if n_filters < 2 {
        return Err(FeatureError::InvalidSettings(format!(
            "need at least 2 mel filters, got {n_filters}"
        )));
    }
    if fft_size == 0 || !fft_size.is_power_of_two() {
        return Err(FeatureError::InvalidFftSize(fft_size));
    }
    if sample_rate == 0 {
        return Err(FeatureError::InvalidSettings("sample rate must be positive".into()));
    }
    let f_low = 0.0;
    let f_high = sample_rate as f64 / 2.0;
    let (mel_low, mel_high) = (hz_to_mel(f_low), hz_to_mel(f_high));
    let step = (mel_high - mel_low) / (n_filters + 1) as f64;
    let edges: Vec<usize> = (0..n_filters + 2)
        .map(|i| {
            let hz = mel_to_hz(mel_low + step * i as f64);
            ((fft_size + 1) as f64 * hz / sample_rate as f64).floor() as usize
        })
        .collect();
    if let Some(i) = edges.windows(2).position(|w| w[0] >= w[1]) {
        return Err(FeatureError::FilterbankTooCoarse {
            fft_size,
            n_filters,
            bin: edges[i],
        });
    }

    let bins = fft_size / 2 + 1;
    let mut weights = vec![0.0; n_filters * bins];
    for f in 0..n_filters {
        let (lo, mid, hi) = (edges[f], edges[f + 1], edges[f + 2]);
        let row = &mut weights[f * bins..(f + 1) * bins];
        for k in lo..=hi.min(bins - 1) {
            row[k] = if k <= mid {
                (k - lo) as f64 / (mid - lo) as f64
            } else {
                (hi - k) as f64 / (hi - mid) as f64
            };
        }
    }
    Ok(MelFilterbank {
        n_filters,
        fft_size,
        sample_rate,
        f_low,
        f_high,
        edges,
        weights,
    })
}

impl MelFilterbank {
    pub fn n_filters(&self) -> usize {
        self.n_filters
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn band(&self) -> (f64, f64) {
        (self.f_low, self.f_high)
    }

    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Weights of filter `i` over bins `0..=fft_size/2`.
    pub fn filter(&self, i: usize) -> &[f64] {
        let bins = self.n_bins();
        &self.weights[i * bins..(i + 1) * bins]
    }

    /// FFT bin at which filter `i` peaks.
    pub fn center_bin(&self, i: usize) -> usize {
        self.edges[i + 1]
    }

    /// Bin edges: lower edge of filter 0, every center, upper edge of the last.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    /// Continuous center frequency of filter `i` before bin rounding.
    pub fn center_hz(&self, i: usize) -> f64 {
        let (lo, hi) = (hz_to_mel(self.f_low), hz_to_mel(self.f_high));
        mel_to_hz(lo + (hi - lo) * (i + 1) as f64 / (self.n_filters + 1) as f64)
    }

    /// Filter energies: one dot product per filter.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        debug_assert_eq!(power.len(), self.n_bins());
        (0..self.n_filters)
            .map(|i| self.filter(i).iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}
