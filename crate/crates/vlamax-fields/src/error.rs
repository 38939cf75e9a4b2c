use thiserror::Error;

/// Failures of the field machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("degenerate {what}: {value:e} is below the cut-off")]
    Degenerate { what: &'static str, value: f64 },
    #[error("quadrature did not converge: estimated error {estimate:e} after order {order}")]
    QuadratureBudget { estimate: f64, order: usize },
    #[error("retarded-time bracket is not monotone at s = {s} (h' = {slope})")]
    CorruptHistory { s: f64, slope: f64 },
    #[error("retarded-time solve stalled with residual {residual:e}")]
    RetardedResidual { residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("strict mode rejects {0}")]
    StrictMode(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;
