use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the patchwork library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite parameter in term {term}: {what}")]
    NonFiniteParameter { term: usize, what: &'static str },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("normal {index} is not unit length (norm {norm})")]
    NonUnitNormal { index: usize, norm: f64 },

    #[error("degenerate gradient at {count} sample(s)")]
    DegenerateGradient { count: usize },

    #[error("non-finite gradient")]
    NonFiniteGradient,

    #[error("too many consecutive skipped steps ({0})")]
    TooManySkippedSteps(usize),

    #[error("memory budget exceeded: {requested} elements requested, cap is {cap}")]
    MemoryBudgetExceeded { requested: usize, cap: usize },

    #[error("numerically degenerate constraint set: {0}")]
    NumericalDegeneracy(String),

    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),

    #[error("degenerate bounding box")]
    DegenerateBBox,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error in {path}: {location}: {message}")]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("checkpoint version {found} is not supported (max {supported})")]
    VersionMismatch { found: u32, supported: u32 },

    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),

    #[error("unknown oracle shape: {0}")]
    UnknownShape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
