//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed header: expected `t_ms,x_deg,y_deg`, got `{0}`")]
    MalformedHeader(String),
    #[error("row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },
    #[error("row {row}: timestamps not strictly increasing ({prev} then {curr})")]
    NonMonotoneTimestamps { row: usize, prev: f64, curr: f64 },
    #[error("row {row}: sample spacing {spacing} ms inconsistent with {expected} ms at {rate} Hz")]
    InconsistentSpacing {
        row: usize,
        spacing: f64,
        expected: f64,
        rate: f64,
    },
    #[error("recording is empty")]
    EmptyRecording,
    #[error("invalid metadata `{key}={value}`: {msg}")]
    InvalidMetadata {
        key: String,
        value: String,
        msg: String,
    },

    #[error("input too short: need at least {min} samples, got {got}")]
    TooShort { min: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("filter design: {0}")]
    Design(String),
    #[error("filter is unstable: pole magnitude {0} >= 1")]
    Unstable(f64),

    #[error("frequency grids do not match")]
    GridMismatch,
    #[error("segment length {got} does not match configured N = {expected}")]
    SegmentLength { expected: usize, got: usize },
    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("cannot average an empty list of spectra")]
    EmptySpectra,

    #[error("regression input: {0}")]
    Regression(String),
    #[error("saccade amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),

    #[error("synthetic profiles overlap at {0} ms")]
    OverlappingProfiles(f64),
    #[error("frequency {freq_hz} Hz is outside [0, {nyquist_hz}) Hz")]
    AliasRange { freq_hz: f64, nyquist_hz: f64 },

    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
