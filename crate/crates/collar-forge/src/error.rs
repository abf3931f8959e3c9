//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CollarError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("not a cover: {0}")]
    NotACover(String),

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shrunken cover fails to cover near {0:?}; delta0 too small for this geometry")]
    ShrunkenCoverGap(Vec<f64>),

    #[error("point outside base: {0:?}")]
    OutsideBase(Vec<f64>),

    #[error("chart inversion failed, residual {residual}")]
    InversionFailed { residual: f64 },

    #[error("operation not supported by this chart: {0}")]
    Unsupported(&'static str),

    #[error("validation failed [{check}]: {detail}")]
    ValidationFailed { check: String, detail: String },

    #[error("closed set intersects the collar base on samples")]
    RegionTouchesBase,

    #[error("fiber crosses sides, not two-sided at {0:?}")]
    NotTwoSided(Vec<f64>),

    #[error("epsilon {eps} exceeds admissible maximum {max}")]
    EpsilonTooLarge { eps: f64, max: f64 },

    #[error("all sampled pairs degenerate")]
    DegeneratePairs,

    #[error("inconsistent fixture: {0}")]
    InconsistentFixture(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CollarError>;
