//! On-disk feature files.
//!
//! Binary layout, little-endian: the four magic bytes `PDF1`, `u32` frame
//! count, `u32` coefficient count, then every value as `f64`, row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureError, FeatureMatrix, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"PDF1";

fn io_err(path: &Path, reason: impl ToString) -> FeatureError {
    FeatureError::Io {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

pub fn encode_features(fm: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + fm.as_slice().len() * 8);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&(fm.n_frames() as u32).to_le_bytes());
    out.extend_from_slice(&(fm.dims() as u32).to_le_bytes());
    for v in fm.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_features(bytes: &[u8]) -> std::result::Result<FeatureMatrix, String> {
    if bytes.len() < 12 || &bytes[..4] != FEATURE_MAGIC {
        return Err("missing PDF1 header".into());
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (frames, dims) = (word(4), word(8));
    let expected = frames
        .checked_mul(dims)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(12))
        .ok_or("header sizes overflow")?;
    if bytes.len() != expected {
        return Err(format!(
            "expected {expected} bytes for {frames}x{dims}, found {}",
            bytes.len()
        ));
    }
    let data = bytes[12..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(dims, data).map_err(|e| e.to_string())
}

pub fn write_features(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_features(fm)).map_err(|e| io_err(path, e))
}

pub fn read_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    decode_features(&bytes).map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct FeatureJson {
    n_frames: usize,
    dims: usize,
    frames: Vec<Vec<f64>>,
}

/// Human-readable export of the same content as the binary file.
pub fn write_features_json(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let doc = FeatureJson {
        n_frames: fm.n_frames(),
        dims: fm.dims(),
        frames: fm.frames().map(<[f64]>::to_vec).collect(),
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| io_err(path, e))?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_features_json(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: FeatureJson = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    if doc.frames.len() != doc.n_frames {
        return Err(io_err(path, "frame count does not match header"));
    }
    let fm = FeatureMatrix::from_frames(&doc.frames).map_err(|e| io_err(path, e))?;
    if fm.dims() != doc.dims {
        return Err(io_err(path, "dimension does not match header"));
    }
    Ok(fm)
}
