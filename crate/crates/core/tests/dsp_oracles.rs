mod common;

use std::f64::consts::PI;

use common::direct_dft;
use isoword::audio::AudioClip;
use isoword::features::{dct_ortho, dft, inverse_dft, FeatureSettings, MfccExtractor};
use proptest::prelude::*;

proptest! {
    #[test]
    fn fft_matches_direct_summation(x in prop::collection::vec(-1.0f64..1.0, 1..300)) {
        let n = x.len().next_power_of_two();
        let fast = dft(&x, n).unwrap();
        for (f, (re, im)) in fast.iter().zip(direct_dft(&x, n)) {
            prop_assert!((f.re - re).abs() < 1e-9 && (f.im - im).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_recovers_padded_frame(x in prop::collection::vec(-1.0f64..1.0, 1..300)) {
        let n = x.len().next_power_of_two();
        let back = inverse_dft(&dft(&x, n).unwrap()).unwrap();
        for (t, v) in back.iter().enumerate() {
            let expected = x.get(t).copied().unwrap_or(0.0);
            prop_assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn dct_matches_textbook_formula(x in prop::collection::vec(-5.0f64..5.0, 2..40)) {
        let m = x.len();
        let out = dct_ortho(&x, m);
        for (k, c) in out.iter().enumerate() {
            let scale = if k == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() };
            let direct: f64 = x
                .iter()
                .enumerate()
                .map(|(i, v)| v * (PI * k as f64 * (i as f64 + 0.5) / m as f64).cos())
                .sum();
            prop_assert!((c - scale * direct).abs() < 1e-9);
        }
    }
}

#[test]
fn pure_tone_peaks_at_its_bin() {
    let n = 512;
    let x: Vec<f64> = (0..n).map(|t| (2.0 * PI * 37.0 * t as f64 / n as f64).cos()).collect();
    let spectrum = dft(&x, n).unwrap();
    let peak = (0..n / 2).max_by(|&a, &b| spectrum[a].norm().total_cmp(&spectrum[b].norm())).unwrap();
    assert_eq!(peak, 37);
    assert!((spectrum[37].norm() - n as f64 / 2.0).abs() < 1e-9);
}

#[test]
fn frame_count_follows_hop() {
    let settings = FeatureSettings::default();
    let ex = MfccExtractor::new(&settings, 16_000).unwrap();
    // 400-sample frames every 160 samples: 1 + (16000 - 400) / 160 complete frames.
    let fm = ex.extract(&AudioClip::mono(vec![0.1; 16_000], 16_000)).unwrap();
    assert_eq!(fm.n_frames(), 98);
    assert_eq!(fm.dims(), 13);
}

#[test]
fn mfcc_criteria_hold() {
    assert!(common::criterion_1_dsp().passed);
    assert!(common::criterion_2_mfcc().passed);
}
