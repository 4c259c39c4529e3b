use std::path::PathBuf;

use rayon::prelude::*;

use super::{DatasetManifest, EvalError, ManifestEntry, Result};
use crate::audio::{pitch_shift, AudioClip};

/// Take numbers of clones start at this multiple; the source take is the
/// remainder.
pub const AUGMENT_TAKE_STRIDE: u32 = 1000;

/// Take number of the `k`-th clone of `take`.
pub fn augmented_take(take: u32, k: usize) -> u32 {
    AUGMENT_TAKE_STRIDE * (k as u32 + 1) + take
}

/// Take number of the original an entry derives from.
pub fn source_take(take: u32) -> u32 {
    take % AUGMENT_TAKE_STRIDE
}

fn clone_path(path: &std::path::Path, semitones: f64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let sign = if semitones < 0.0 { "m" } else { "p" };
    let name = format!("{stem}_ps{sign}{}.wav", format_semitones(semitones.abs()));
    path.with_file_name(name)
}

fn format_semitones(s: f64) -> String {
    let text = format!("{s}");
    text.replace('.', "_")
}

/// Appends one pitch-shifted clone per original clip and semitone value.
///
/// Entries already marked as augmented are dropped and regenerated from
/// their originals, so clones are never cloned and re-running on the output
/// reproduces it. Clone paths sit next to their source with a `_ps{p|m}<n>`
/// suffix.
pub fn augment_corpus(
    manifest: &DatasetManifest,
    clips: &[AudioClip],
    semitones: &[f64],
) -> Result<(DatasetManifest, Vec<AudioClip>)> {
    if clips.len() != manifest.len() {
        return Err(EvalError::Features(format!(
            "{} clips for {} manifest entries",
            clips.len(),
            manifest.len()
        )));
    }
    let sources: Vec<usize> = (0..manifest.len())
        .filter(|&i| !manifest.entries()[i].augmented)
        .collect();
    if let Some(&i) = sources
        .iter()
        .find(|&&i| manifest.entries()[i].take >= AUGMENT_TAKE_STRIDE)
    {
        return Err(EvalError::InfeasibleSplit(format!(
            "original take {} must be below {AUGMENT_TAKE_STRIDE} to be augmented",
            manifest.entries()[i].take
        )));
    }
    let jobs: Vec<(usize, usize)> = sources
        .iter()
        .flat_map(|&i| (0..semitones.len()).map(move |k| (i, k)))
        .collect();
    let shifted = jobs
        .par_iter()
        .map(|&(i, k)| pitch_shift(&clips[i], semitones[k]))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut entries: Vec<ManifestEntry> = sources.iter().map(|&i| manifest.entries()[i].clone()).collect();
    let mut out_clips: Vec<AudioClip> = sources.iter().map(|&i| clips[i].clone()).collect();
    for (&(i, k), clip) in jobs.iter().zip(shifted) {
        let src = &manifest.entries()[i];
        entries.push(ManifestEntry {
            path: clone_path(&src.path, semitones[k]),
            speaker: src.speaker.clone(),
            word: src.word.clone(),
            take: augmented_take(src.take, k),
            augmented: true,
        });
        out_clips.push(clip);
    }
    Ok((DatasetManifest::from_entries(entries)?, out_clips))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(n: usize) -> (DatasetManifest, Vec<AudioClip>) {
        let entries = (0..n)
            .map(|i| ManifestEntry::new(format!("d/c{i}.wav"), "s", &format!("w{i}"), 0))
            .collect();
        let clips = (0..n)
            .map(|i| {
                let s: Vec<f64> = (0..4000)
                    .map(|t| 0.3 * (t as f64 * 0.05 * (i + 1) as f64).sin())
                    .collect();
                AudioClip::mono(s, 16000)
            })
            .collect();
        (DatasetManifest::from_entries(entries).unwrap(), clips)
    }

    #[test]
    fn ten_clips_two_shifts_give_thirty() {
        let (m, clips) = corpus(10);
        let (aug, aug_clips) = augment_corpus(&m, &clips, &[-2.0, 2.0]).unwrap();
        assert_eq!(aug.len(), 30);
        assert_eq!(aug_clips.len(), 30);
        assert_eq!(aug.entries().iter().filter(|e| e.augmented).count(), 20);
        assert_eq!(aug.entries()[10].path, PathBuf::from("d/c0_psm2.wav"));
        assert_eq!(aug.entries()[11].take, 2000);
        assert_eq!(aug_clips[10].frames(), clips[0].frames());
    }

    #[test]
    fn empty_shift_list_is_identity() {
        let (m, clips) = corpus(3);
        let (aug, aug_clips) = augment_corpus(&m, &clips, &[]).unwrap();
        assert_eq!(aug, m);
        assert_eq!(aug_clips, clips);
    }

    #[test]
    fn clones_are_never_cloned_again() {
        let (m, clips) = corpus(2);
        let (once, once_clips) = augment_corpus(&m, &clips, &[2.0]).unwrap();
        let (twice, twice_clips) = augment_corpus(&once, &once_clips, &[2.0]).unwrap();
        assert_eq!(twice, once);
        assert_eq!(twice_clips, once_clips);
        let (other, _) = augment_corpus(&once, &once_clips, &[-2.0, 2.0]).unwrap();
        assert_eq!(other.len(), 6);
    }

    #[test]
    fn take_bookkeeping() {
        assert_eq!(augmented_take(3, 0), 1003);
        assert_eq!(augmented_take(3, 1), 2003);
        assert_eq!(source_take(2003), 3);
    }
}
