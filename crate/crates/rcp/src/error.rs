//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RcpError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error in {path}: {message}")]
    Csv { path: String, message: String },

    /// A cell failed to parse or validate; positions are 1-based data rows.
    #[error("data error at row {row}, column '{column}': {message}")]
    Cell {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid dataset: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("treatment arm {arm} too small: {n} unit(s), need at least {need}")]
    ArmTooSmall { arm: u8, n: usize, need: usize },

    /// Baseline interval has zero total width, so the relative width
    /// `lambda(x)` is undefined. Callers may force `lambda = 1` instead.
    #[error("degenerate-interval: zero total width in arm {arm}; pass lambda_one to override")]
    DegenerateInterval { arm: u8 },

    #[error("arm {arm} is not calibrated")]
    Uncalibrated { arm: u8 },

    #[error("bootstrap replicate failed after {retries} retries: {message}")]
    BootstrapFailed { retries: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{failed} of {total} experiment cells failed")]
    CellFailures { failed: usize, total: usize },
}
