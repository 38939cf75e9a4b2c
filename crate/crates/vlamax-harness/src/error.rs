use thiserror::Error;
use vlamax_fields::FieldError;
use vlamax_sim::SimError;
use vlamax_transport::TransportError;

/// Failures of experiment orchestration.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config syntax: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config output: {0}")]
    TomlWrite(#[from] toml::ser::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
