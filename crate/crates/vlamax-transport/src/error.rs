use thiserror::Error;

/// Failures of the transport computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("size mismatch: {left} vs {right} atoms")]
    SizeMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("empirical measures need at least one atom")]
    Empty,
    #[error("atom {index} is not finite")]
    NonFinite { index: usize },
    #[error("order p must be a finite number >= 1, got {0}")]
    InvalidOrder(f64),
    #[error("time grids differ: {0}")]
    GridMismatch(String),
    #[error("assignment is infeasible")]
    Infeasible,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, TransportError>;
