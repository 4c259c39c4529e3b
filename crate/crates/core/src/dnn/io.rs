//! JSON model files. Each layer's weights and biases are stored as base64
//! blobs of little-endian `f64` values.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{DnnError, MlpModel, Result, Standardizer};
use crate::config::Provenance;

pub const DNN_FORMAT: &str = "isoword-dnn";
pub const DNN_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerBlob {
    weights: String,
    biases: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DnnFile {
    format: String,
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    layer_sizes: Vec<usize>,
    class_labels: Vec<String>,
    target_frames: usize,
    standardization: Standardizer,
    layers: Vec<LayerBlob>,
}

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

fn decode(text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| DnnError::Format(format!("bad base64 blob: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(DnnError::Format(format!(
            "blob holds {} bytes, expected {}",
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl MlpModel {
    pub fn to_json(&self, provenance: Option<&Provenance>) -> Result<String> {
        let layers = (0..self.n_layers())
            .map(|l| {
                let (w, b) = self.layer(l);
                LayerBlob {
                    weights: encode(w),
                    biases: encode(b),
                }
            })
            .collect();
        let file = DnnFile {
            format: DNN_FORMAT.into(),
            version: DNN_FORMAT_VERSION,
            provenance: provenance.cloned(),
            layer_sizes: self.layer_sizes().to_vec(),
            class_labels: self.class_labels().to_vec(),
            target_frames: self.target_frames(),
            standardization: self.standardizer().clone(),
            layers,
        };
        serde_json::to_string_pretty(&file).map_err(|e| DnnError::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<(Self, Option<Provenance>)> {
        let file: DnnFile = serde_json::from_str(text).map_err(|e| DnnError::Format(e.to_string()))?;
        if file.format != DNN_FORMAT || file.version != DNN_FORMAT_VERSION {
            return Err(DnnError::Format(format!(
                "unsupported model format {} v{}",
                file.format, file.version
            )));
        }
        if file.layer_sizes.len() < 2 || file.layers.len() != file.layer_sizes.len() - 1 {
            return Err(DnnError::Format("layer count does not match layer_sizes".into()));
        }
        let mut params = Vec::with_capacity(MlpModel::param_count(&file.layer_sizes));
        for (pair, blob) in file.layer_sizes.windows(2).zip(&file.layers) {
            params.extend(decode(&blob.weights, pair[0] * pair[1])?);
            params.extend(decode(&blob.biases, pair[1])?);
        }
        let model = MlpModel::new(
            file.layer_sizes,
            params,
            file.class_labels,
            file.target_frames,
            file.standardization,
        )?;
        Ok((model, file.provenance))
    }
}
