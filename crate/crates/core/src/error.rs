use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {dim} exceeds the dense cutoff {cutoff}; use the iterative solver")]
    DenseCutoff { dim: usize, cutoff: usize },

    #[error("iterative eigensolver did not converge (best residual {best_residual:.3e})")]
    NoConvergence { best_residual: f64 },

    #[error("time step underflow at t = {time:.6e} (error estimate {estimate:.3e})")]
    StepUnderflow { time: f64, estimate: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coordinate: {0}")]
    InvalidCoordinate(String),

    #[error("gate at plaquette ({a}, {b}) is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { a: usize, b: usize, deviation: f64 },

    #[error("gate at plaquette ({a}, {b}) lies outside the interaction region")]
    GateOutsideRegion { a: usize, b: usize },

    #[error("operator leaks out of the string sector (max leaked magnitude {0:.3e})")]
    Leakage(f64),

    #[error("malformed circuit description: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
