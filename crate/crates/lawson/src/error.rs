//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("phi index {0} outside the supported range 0..=5")]
    PhiIndex(usize),
    #[error("augmented oracle limited to dimension 200, got {0}")]
    OracleTooLarge(usize),
    #[error("eigensolve failed to converge")]
    EigenNoConvergence,
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error("solution blew up at step {step}: max-norm {norm:.3e}")]
    BlowUp { step: usize, norm: f64 },
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
    #[error("history holds {got} states but {needed} are needed")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
