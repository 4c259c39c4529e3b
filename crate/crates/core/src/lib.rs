//! Isolated-word speech recognition: speech enhancement, pitch-shift
//! augmentation, MFCC features, HMM-GMM and feedforward network classifiers,
//! and an evaluation harness for speaker-dependent, speaker-independent and
//! utterance-count experiments.

pub mod audio;
pub mod config;
pub mod dnn;
pub mod eval;
pub mod features;
pub mod hmm;
pub mod math;
pub mod synth;
pub mod workflow;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/audio.md")]
    mod audio {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/hmm.md")]
    mod hmm {}
    #[doc = include_str!("../../../book/src/dnn.md")]
    mod dnn {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/workflow.md")]
    mod workflow {}
}
