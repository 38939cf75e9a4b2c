use thiserror::Error;
use vlamax_fields::FieldError;

/// Failures of the particle solvers and their persistence.
#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("momentum jump {jump:.3e} of particle {particle} at t = {t} exceeds the stability bound {bound:.3e}")]
    Instability { particle: usize, t: f64, jump: f64, bound: f64 },
    #[error("non-finite state of particle {particle} at t = {t}")]
    NonFinite { particle: usize, t: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("rejection sampler acceptance {rate:.2e} fell below the floor")]
    RejectionFloor { rate: f64 },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
