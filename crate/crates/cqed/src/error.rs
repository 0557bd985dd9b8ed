use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violated a stated precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numeric procedure failed to converge or produced a degenerate system.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),
    /// No spectral peak above the noise floor.
    #[error("no peak above background: {0}")]
    NoPeak(String),
    /// Too few samples to constrain the model.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    /// Integrator or fit configuration outside its validity window.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
