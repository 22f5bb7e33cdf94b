//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CapraError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index k={k} out of range 0..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("vector is not supported in the given index set")]
    NotSupportedInSet,

    #[error("operation requires a nonzero vector")]
    ZeroVector,

    #[error("invalid phi table: {0}")]
    InvalidPhi(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver did not converge (residual {residual:.3e} after {iters} iterations)")]
    SolverDidNotConverge { residual: f64, iters: usize },
}

impl CapraError {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            CapraError::SolverDidNotConverge { .. } => 3,
            _ => 2,
        }
    }
}
