use serde::{Deserialize, Serialize};

use super::{
    estimate_noise_profile, normalize_peak, remove_dc, resample, spectral_subtract, to_mono,
    trim_silence, AudioClip, AudioError, NoiseProfile, Result, SubtractionParams,
};

/// Settings for the enhancement chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnhancementSettings {
    /// Every clip is resampled to this rate before processing.
    pub sample_rate: u32,
    pub subtraction: SubtractionParams,
    /// Length of the leading span used as the noise estimate when no
    /// external noise recording is supplied. Zero disables subtraction in
    /// that case.
    pub noise_lead_ms: f64,
    pub target_peak_db: f64,
    pub trim_threshold_db: f64,
    pub trim_window_ms: f64,
}

impl Default for EnhancementSettings {
    fn default() -> Self {
        Self {
            sample_rate: 16000,
            subtraction: SubtractionParams::default(),
            noise_lead_ms: 100.0,
            target_peak_db: -1.0,
            trim_threshold_db: -40.0,
            trim_window_ms: 10.0,
        }
    }
}

impl EnhancementSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(AudioError::InvalidParameter(m.to_string()));
        if !(8000..=192_000).contains(&self.sample_rate) {
            return bad("sample_rate must lie in [8000, 192000]");
        }
        self.subtraction.validate()?;
        if !(self.noise_lead_ms >= 0.0) || !self.noise_lead_ms.is_finite() {
            return bad("noise_lead_ms must be >= 0");
        }
        if !(-60.0..=0.0).contains(&self.target_peak_db) {
            return bad("target_peak_db must lie in [-60, 0]");
        }
        if !(-120.0..0.0).contains(&self.trim_threshold_db) {
            return bad("trim_threshold_db must lie in [-120, 0)");
        }
        if !(self.trim_window_ms > 0.0 && self.trim_window_ms <= 1000.0) {
            return bad("trim_window_ms must lie in (0, 1000]");
        }
        Ok(())
    }
}

/// Where the noise estimate for one clip came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseSource {
    External,
    LeadingSpan,
    /// The clip or span was too short for one analysis window.
    Skipped,
}

/// Per-clip record of what the chain did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancementReport {
    pub peak_before: f64,
    pub peak_after: f64,
    pub noise_source: NoiseSource,
    pub trimmed_ms: f64,
    pub duration_ms: f64,
}

/// Runs the enhancement chain and returns only the clip.
pub fn enhance(
    clip: &AudioClip,
    settings: &EnhancementSettings,
    noise: Option<&AudioClip>,
) -> Result<AudioClip> {
    enhance_with_report(clip, settings, noise).map(|(clip, _)| clip)
}

/// Resample, merge to mono, subtract noise, normalize the peak, remove DC,
/// then trim leading and trailing silence.
///
/// Trimming moves the mean and DC removal moves the peak, so the chain
/// finishes by re-centering and re-scaling the trimmed clip. Both operations
/// are near-identities at that point; they make the output satisfy the
/// zero-mean and peak-target postconditions exactly.
pub fn enhance_with_report(
    clip: &AudioClip,
    settings: &EnhancementSettings,
    noise: Option<&AudioClip>,
) -> Result<(AudioClip, EnhancementReport)> {
    settings.validate()?;
    if clip.is_empty() {
        return Err(AudioError::EmptyClip);
    }
    let peak_before = clip.peak();
    let mono = to_mono(&resample(clip, settings.sample_rate)?);

    let n = settings.subtraction.fft_size;
    let (profile, noise_source) = match noise {
        Some(noise) => {
            let noise = to_mono(&resample(noise, settings.sample_rate)?);
            if noise.frames() >= n {
                let span = 0.0..noise.duration_secs();
                (Some(estimate_noise_profile(&noise, span, n)?), NoiseSource::External)
            } else {
                (None, NoiseSource::Skipped)
            }
        }
        None => {
            let lead = (settings.noise_lead_ms / 1000.0).min(mono.duration_secs());
            if (lead * settings.sample_rate as f64).round() as usize >= n {
                (Some(estimate_noise_profile(&mono, 0.0..lead, n)?), NoiseSource::LeadingSpan)
            } else {
                (None, NoiseSource::Skipped)
            }
        }
    };
    let denoised = match &profile {
        Some(profile) => spectral_subtract(&mono, profile, &settings.subtraction)?,
        None => spectral_subtract(&mono, &NoiseProfile::zero(n), &settings.subtraction)?,
    };

    let normalized = normalize_peak(&denoised, settings.target_peak_db)?;
    let centered = remove_dc(&normalized);
    let trimmed = trim_silence(
        &centered,
        settings.trim_threshold_db,
        settings.trim_window_ms,
    )?;
    let out = normalize_peak(&remove_dc(&trimmed), settings.target_peak_db)?;

    let rate = settings.sample_rate as f64;
    let report = EnhancementReport {
        peak_before,
        peak_after: out.peak(),
        noise_source,
        trimmed_ms: (centered.frames() - trimmed.frames()) as f64 * 1000.0 / rate,
        duration_ms: out.frames() as f64 * 1000.0 / rate,
    };
    Ok((out, report))
}
