//! Crate-wide error type.

use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Tensor operands disagree on mode sizes or rank chains.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A multi-index or variable number lies outside the valid range.
    #[error("index out of range: {0}")]
    Range(String),

    /// Invalid parameter values (distribution parameters, thresholds, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation would exceed a configured size cap.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// The model has (numerically) zero output variance.
    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    /// A low-rank approximation could not reach the requested accuracy.
    #[error("approximation failure: {0}")]
    Approximation(String),

    /// An internal cross-check failed (e.g. a Sobol tensor that is not
    /// properly zeroed at the empty tuple).
    #[error("consistency check failed: {0}")]
    Consistency(String),

    /// The model produced a non-finite output.
    #[error("invalid model output: {0}")]
    Data(String),

    /// Communication with an external evaluator process failed.
    #[error("evaluator transport: {0}")]
    Transport(String),

    /// An external evaluator did not answer in time.
    #[error("evaluator timed out after {0:?}")]
    Timeout(Duration),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed tensor file or sidecar.
    #[error("file format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
