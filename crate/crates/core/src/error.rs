use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("uncertainty set of individual {individual} has no candidates")]
    EmptySet { individual: usize },

    #[error("label {label} at position {position} is outside 1..={max}")]
    BadLabel {
        position: usize,
        label: usize,
        max: usize,
    },

    #[error("invalid uncertainty model: {0}")]
    InvalidModel(String),

    #[error("transform produced a non-finite value for individual {individual}, sample {sample}")]
    TransformFailure { individual: usize, sample: usize },

    #[error("transform input is singular (|p| = {norm:e})")]
    SingularInput { norm: f64 },

    #[error("feature dimension {dim} is constant across all candidates")]
    DegenerateDimension { dim: usize },

    #[error("dataset is already standardized")]
    AlreadyStandardized,

    #[error("requested {k} clusters for {n} points")]
    KTooLarge { k: usize, n: usize },

    #[error("label vectors differ in length: {pred} vs {truth}")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Schema { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
