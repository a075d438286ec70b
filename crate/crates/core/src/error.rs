//! Error type shared by every pipeline in this crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input that could not be parsed (bad PGM header, bad record line).
    #[error("parse error: {0}")]
    ParseError(String),

    /// Input parsed but uses a format variant this crate does not handle.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// A numeric or structural parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Histogram has no usable two-mode structure to threshold between.
    #[error("histogram is not bimodal")]
    NotBimodal,

    /// Operation needs a physical pixel pitch but the image carries none.
    #[error("missing calibration: pixel pitch not set")]
    MissingCalibration,

    /// No signal to analyze (zero spectral energy, no detected lines).
    #[error("no signal: {0}")]
    NoSignal(String),

    /// Random placement could not satisfy the non-overlap constraint.
    #[error("placement failure: could not place object after {0} attempts")]
    PlacementFailure(usize),

    /// Binary image contains no foreground pixels.
    #[error("empty foreground")]
    EmptyForeground,

    /// Distribution has no entries to take a percentile of.
    #[error("empty distribution")]
    EmptyDistribution,

    /// Calibration input does not cover all five pilling grades.
    #[error("incomplete calibration: grade {0} missing")]
    IncompleteCalibration(u8),

    /// Per-grade calibration means are not strictly monotone at this level.
    #[error("non-monotone calibration at level {0}")]
    NonMonotoneCalibration(usize),

    /// Training data does not contain every class.
    #[error("incomplete dataset: class {0} missing")]
    IncompleteDataset(String),

    /// Training loss became non-finite.
    #[error("training diverged at epoch {0}")]
    DivergenceError(usize),

    /// Regression input has zero variance in the predictor.
    #[error("degenerate fit: predictor values are all equal")]
    DegenerateFit,
}

pub type Result<T> = std::result::Result<T, Error>;
