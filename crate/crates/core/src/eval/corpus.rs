use rayon::prelude::*;

use super::{DatasetManifest, EvalError, Result};
use crate::audio::{enhance, load_clip, AudioClip, EnhancementSettings};
use crate::features::{read_features, FeatureMatrix, FeatureSettings, MfccExtractor};

/// A manifest paired with one feature matrix per entry, in entry order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    manifest: DatasetManifest,
    features: Vec<FeatureMatrix>,
}

impl FeatureSet {
    pub fn new(manifest: DatasetManifest, features: Vec<FeatureMatrix>) -> Result<Self> {
        if features.len() != manifest.len() {
            return Err(EvalError::Features(format!(
                "{} feature matrices for {} manifest entries",
                features.len(),
                manifest.len()
            )));
        }
        if let Some(fm) = features.iter().find(|f| f.dims() != features[0].dims()) {
            return Err(EvalError::Features(format!(
                "mixed feature widths {} and {}",
                features[0].dims(),
                fm.dims()
            )));
        }
        Ok(Self { manifest, features })
    }

    /// MFCCs of in-memory clips, optionally enhanced first.
    pub fn from_clips(
        manifest: DatasetManifest,
        clips: &[AudioClip],
        features: &FeatureSettings,
        enhancement: Option<&EnhancementSettings>,
    ) -> Result<Self> {
        if clips.len() != manifest.len() {
            return Err(EvalError::Features(format!(
                "{} clips for {} manifest entries",
                clips.len(),
                manifest.len()
            )));
        }
        let sample_rate = clips.first().map_or(16_000, |c| c.sample_rate());
        let extractor = MfccExtractor::new(features, sample_rate)?;
        let mats = clips
            .par_iter()
            .map(|clip| -> Result<FeatureMatrix> {
                match enhancement {
                    Some(settings) => Ok(extractor.extract(&enhance(clip, settings, None)?)?),
                    None => Ok(extractor.extract(clip)?),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest, mats)
    }

    /// MFCCs of the WAV files a manifest points at, resampled to `sample_rate`.
    pub fn from_wavs(manifest: DatasetManifest, features: &FeatureSettings, sample_rate: u32) -> Result<Self> {
        let extractor = MfccExtractor::new(features, sample_rate)?;
        let mats = manifest
            .entries()
            .par_iter()
            .map(|e| Ok(extractor.extract(&load_clip(&e.path, sample_rate)?)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest, mats)
    }

    /// Feature files (binary format) the manifest points at.
    pub fn from_feature_files(manifest: DatasetManifest) -> Result<Self> {
        let mats = manifest
            .entries()
            .par_iter()
            .map(|e| Ok(read_features(&e.path)?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest, mats)
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn features(&self) -> &[FeatureMatrix] {
        &self.features
    }

    pub fn get(&self, i: usize) -> &FeatureMatrix {
        &self.features[i]
    }

    /// `(word, features)` pairs for the given entry indices.
    pub fn labeled(&self, indices: &[usize]) -> Vec<(&str, &FeatureMatrix)> {
        indices
            .iter()
            .map(|&i| (self.manifest.entries()[i].word.as_str(), &self.features[i]))
            .collect()
    }
}
