//! Filtering and spectral-analysis toolkit for high-rate eye-movement
//! signals.
//!
//! The library covers the full pipeline for comparing gaze filters on
//! 1000 Hz recordings: heuristic despike filters, zero-phase Butterworth
//! low-pass and band filters, segment-averaged FFT amplitude/phase spectra,
//! empirical filter frequency-response estimation, and saccade
//! main-sequence slope analysis. Deterministic synthetic generators provide
//! ground truth for testing and demonstrations; the `oculofilt` binary
//! wires everything into a batch CLI.

pub mod error;
pub mod heuristic;
pub mod iir;
pub mod kinematics;
pub mod mainseq;
pub mod pipeline;
pub mod recording;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use recording::{
    contiguous_valid_spans, load_recording, serialize_recording, Eye, FilterKind, Recording, Span,
};
pub mod cli;
