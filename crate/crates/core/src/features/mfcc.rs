use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{build_filterbank, periodogram, FeatureError, FeatureMatrix, FeatureSettings, MelFilterbank, Result};
use crate::audio::AudioClip;

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Cuts a mono clip into Hamming-windowed frames.
///
/// Frame `m` covers samples `m * hop .. m * hop + frame_len`; the count is
/// `floor((len - frame_len) / hop) + 1`, so trailing samples that do not
/// fill a whole frame are dropped.
pub fn frame_signal(clip: &AudioClip, settings: &FeatureSettings) -> Result<Vec<Vec<f64>>> {
    settings.validate()?;
    if clip.channels() != 1 {
        return Err(FeatureError::NotMono(clip.channels()));
    }
    let frame_len = settings.frame_len(clip.sample_rate());
    let hop = settings.hop_len(clip.sample_rate()).max(1);
    let x = clip.samples();
    if frame_len == 0 || x.len() < frame_len {
        return Err(FeatureError::ClipTooShort {
            len: x.len(),
            frame: frame_len,
        });
    }
    let window = hamming(frame_len);
    let count = (x.len() - frame_len) / hop + 1;
    Ok((0..count)
        .map(|m| {
            x[m * hop..m * hop + frame_len]
                .iter()
                .zip(&window)
                .map(|(s, w)| s * w)
                .collect()
        })
        .collect())
}

/// Orthonormal DCT-II of `input`, keeping the first `n_out` coefficients.
pub fn dct_ortho(input: &[f64], n_out: usize) -> Vec<f64> {
    let n = input.len() as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            scale
                * input
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * n)).cos())
                    .sum::<f64>()
        })
        .collect()
}

/// Reusable MFCC pipeline for one sample rate: FFT plan, filterbank and DCT
/// basis are built once and shared read-only.
pub struct MfccExtractor {
    settings: FeatureSettings,
    sample_rate: u32,
    filterbank: MelFilterbank,
    fft: Arc<dyn Fft<f64>>,
    /// Row-major `n_ceps x n_filters`.
    dct: Vec<f64>,
}

impl MfccExtractor {
    pub fn new(settings: &FeatureSettings, sample_rate: u32) -> Result<Self> {
        settings.validate()?;
        let frame_len = settings.frame_len(sample_rate);
        if frame_len > settings.fft_size {
            return Err(FeatureError::FrameTooLong {
                len: frame_len,
                n: settings.fft_size,
            });
        }
        let filterbank = build_filterbank(settings.n_filters, settings.fft_size, sample_rate)?;
        let m = settings.n_filters;
        let mut dct = Vec::with_capacity(settings.n_ceps * m);
        for k in 0..settings.n_ceps {
            let mut unit = vec![0.0; m];
            for (i, slot) in unit.iter_mut().enumerate() {
                let scale = if k == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() };
                *slot = scale * (PI * k as f64 * (2 * i + 1) as f64 / (2.0 * m as f64)).cos();
            }
            dct.extend(unit);
        }
        Ok(Self {
            settings: settings.clone(),
            sample_rate,
            filterbank,
            fft: FftPlanner::new().plan_fft_forward(settings.fft_size),
            dct,
        })
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    pub fn settings(&self) -> &FeatureSettings {
        &self.settings
    }

    /// Cepstral vector of one windowed frame.
    pub fn frame_cepstrum(&self, frame: &[f64]) -> Vec<f64> {
        let n = self.settings.fft_size;
        let mut buf: Vec<Complex64> = frame.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        buf.resize(n, Complex64::new(0.0, 0.0));
        self.fft.process(&mut buf);
        let power = periodogram(&buf, n);
        let log_energy: Vec<f64> = self
            .filterbank
            .apply(&power)
            .into_iter()
            .map(|e| e.max(self.settings.log_floor).ln())
            .collect();
        let m = self.settings.n_filters;
        self.dct
            .chunks_exact(m)
            .map(|basis| basis.iter().zip(&log_energy).map(|(b, e)| b * e).sum())
            .collect()
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<FeatureMatrix> {
        if clip.sample_rate() != self.sample_rate {
            return Err(FeatureError::InvalidSettings(format!(
                "extractor built for {} Hz, clip is {} Hz",
                self.sample_rate,
                clip.sample_rate()
            )));
        }
        let frames = frame_signal(clip, &self.settings)?;
        let data: Vec<f64> = frames.iter().flat_map(|f| self.frame_cepstrum(f)).collect();
        FeatureMatrix::new(self.settings.n_ceps, data)
    }
}

/// One-shot MFCC extraction. Builds a fresh [`MfccExtractor`]; reuse one
/// extractor when processing many clips.
pub fn mfcc(clip: &AudioClip, settings: &FeatureSettings) -> Result<FeatureMatrix> {
    MfccExtractor::new(settings, clip.sample_rate())?.extract(clip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> FeatureSettings {
        FeatureSettings::default()
    }

    #[test]
    fn frame_counts() {
        let one_sec = AudioClip::mono(vec![0.1; 16000], 16000);
        let frames = frame_signal(&one_sec, &settings()).unwrap();
        // floor((16000 - 400) / 160) + 1
        assert_eq!(frames.len(), 98);
        assert!(frames.iter().all(|f| f.len() == 400));

        let exact = AudioClip::mono(vec![0.1; 400], 16000);
        assert_eq!(frame_signal(&exact, &settings()).unwrap().len(), 1);

        let short = AudioClip::mono(vec![0.1; 160], 16000);
        assert!(matches!(
            frame_signal(&short, &settings()),
            Err(FeatureError::ClipTooShort { .. })
        ));
    }

    #[test]
    fn frames_are_hamming_weighted() {
        let clip = AudioClip::mono(vec![1.0; 400], 16000);
        let f = &frame_signal(&clip, &settings()).unwrap()[0];
        assert!((f[0] - 0.08).abs() < 1e-12);
        assert!((f[399] - 0.08).abs() < 1e-12);
    }

    #[test]
    fn dct_of_constant_lives_in_c0() {
        let c = dct_ortho(&[2.0; 26], 13);
        assert!((c[0] - 2.0 * 26f64.sqrt()).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn dct_is_orthonormal() {
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let c = dct_ortho(&x, 8);
        let e_x: f64 = x.iter().map(|v| v * v).sum();
        let e_c: f64 = c.iter().map(|v| v * v).sum();
        assert!((e_x - e_c).abs() < 1e-12);
    }

    #[test]
    fn extractor_matches_explicit_dct() {
        let clip = AudioClip::mono(
            (0..1200).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect(),
            16000,
        );
        let ex = MfccExtractor::new(&settings(), 16000).unwrap();
        let frames = frame_signal(&clip, &settings()).unwrap();
        let spec = super::super::dft(&frames[2], 512).unwrap();
        let energies: Vec<f64> = ex
            .filterbank()
            .apply(&periodogram(&spec, 512))
            .iter()
            .map(|e| e.max(1e-10).ln())
            .collect();
        let expected = dct_ortho(&energies, 13);
        let got = ex.extract(&clip).unwrap();
        for (a, b) in got.frame(2).iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn stereo_is_rejected() {
        let clip = AudioClip::new(vec![0.1; 1600], 16000, 2).unwrap();
        assert!(matches!(mfcc(&clip, &settings()), Err(FeatureError::NotMono(2))));
    }
}
