//! # mrcp — movement-related cortical potential decoding
//!
//! A toolkit for decoding upper-limb movement from low-frequency EEG.
//! It implements the full pipeline end to end:
//!
//! * preprocessing — resampling, per-channel z-normalization, zero-phase
//!   bandpass filtering and filter-bank division ([`dsp`]);
//! * trajectory-based movement-onset localization ([`onset`]);
//! * task-related component analysis (TRCA) spatial filtering and canonical
//!   correlation analysis ([`trca`]);
//! * correlation-feature extraction, mRMR feature selection and linear
//!   classifiers for the FBTRCA method ([`features`]);
//! * a small convolutional network with hand-written reverse-mode
//!   differentiation for temporal decoding ([`nnet`]);
//! * method registry (FBTRCA, EEGNet, TEGNet, OTSNet, TTSNet), two-stage
//!   training and a stratified cross-validation harness ([`pipeline`]).
//!
//! Real recordings are not bundled; [`data::SynthSpec`] generates synthetic
//! trials with a known movement-onset morphology so every stage can be
//! exercised and verified at desk scale. The `mrcp` binary exposes the
//! pipeline on the command line; see the book under `book/` for a guided
//! tour.

pub mod data;
pub mod dsp;
pub mod error;
pub mod features;
pub mod linalg;
pub mod nnet;
pub mod onset;
pub mod pipeline;
pub mod trca;

pub use error::{Error, Result};

// The book's code snippets double as doc-tests so the guide cannot drift
// from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(synthetic_data, "../../../book/src/synthetic-data.md");
    chapter!(preprocessing, "../../../book/src/preprocessing.md");
    chapter!(onset_localization, "../../../book/src/onset-localization.md");
    chapter!(spatial_filtering, "../../../book/src/spatial-filtering.md");
    chapter!(correlation_features, "../../../book/src/correlation-features.md");
    chapter!(temporal_decoder, "../../../book/src/temporal-decoder.md");
    chapter!(experiments, "../../../book/src/experiments.md");
    chapter!(file_formats, "../../../book/src/file-formats.md");
}
