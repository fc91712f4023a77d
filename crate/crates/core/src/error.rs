use thiserror::Error;

/// Errors produced by the solver toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {details}")]
    DimensionMismatch { op: &'static str, details: String },

    #[error("matrix is not positive definite: pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("coarse matrix is not positive definite at subdomain block {block}: pivot {pivot:e}")]
    CoarseNotPositiveDefinite { block: usize, pivot: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("generating basis restricted to part {part} is entirely zero")]
    ZeroBasisBlock { part: usize },

    #[error("problem too small for three levels: {0}")]
    TooSmallForThreeLevels(String),

    #[error("preconditioner is not symmetric positive definite: {0}")]
    PreconditionerNotSpd(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at {path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(op: &'static str, details: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            op,
            details: details.into(),
        }
    }
}
