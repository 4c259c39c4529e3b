use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{resample, AudioClip, AudioError, Result};

/// Reads a 16-bit integer or 32-bit float PCM WAV file, mono or stereo.
///
/// Integer samples are scaled by 1/32768; float samples are clamped into
/// [-1, 1]. The native sample rate is kept.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let unreadable = |reason: String| AudioError::Unreadable {
        path: path.to_path_buf(),
        reason,
    };
    let unsupported = |reason: String| AudioError::UnsupportedEncoding {
        path: path.to_path_buf(),
        reason,
    };

    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::Unsupported => unsupported("compressed or non-PCM format".into()),
        hound::Error::IoError(io) => unreadable(io.to_string()),
        other => unreadable(other.to_string()),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 && spec.channels != 2 {
        return Err(unsupported(format!("{} channels", spec.channels)));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>(),
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(|v| (v as f64).clamp(-1.0, 1.0)))
            .collect::<std::result::Result<_, _>>(),
        (format, bits) => {
            return Err(unsupported(format!("{bits}-bit {format:?} samples")));
        }
    }
    .map_err(|e| unreadable(e.to_string()))?;

    if samples.is_empty() {
        return Err(AudioError::Empty(path.to_path_buf()));
    }
    if samples.len() % spec.channels as usize != 0 {
        return Err(unreadable("truncated sample data".into()));
    }
    Ok(AudioClip::from_clamped(samples, spec.sample_rate, spec.channels))
}

/// Reads a WAV file and resamples it to `target_rate` when needed.
pub fn load_clip(path: impl AsRef<Path>, target_rate: u32) -> Result<AudioClip> {
    let clip = read_wav(path)?;
    resample(&clip, target_rate)
}

/// Writes the clip as 16-bit PCM.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if clip.is_empty() {
        return Err(AudioError::EmptyClip);
    }
    let unwritable = |e: hound::Error| AudioError::Unwritable {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let spec = WavSpec {
        channels: clip.channels(),
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    };
    let mut writer = WavWriter::create(path, spec).map_err(unwritable)?;
    for &s in clip.samples() {
        writer.write_sample(quantize(s)).map_err(unwritable)?;
    }
    writer.finalize().map_err(unwritable)
}

fn quantize(s: f64) -> i16 {
    (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}
