use thiserror::Error;

/// Errors produced by grid construction, data ingestion and the numerical
/// solvers.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("grid under-resolves a required bandwidth: {0}")]
    Bandwidth(String),

    #[error("invalid data table {path}: {reason}")]
    Data { path: String, reason: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("numerical failure in {context}: {reason}")]
    Numerics { context: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    pub fn numerics(context: impl Into<String>, reason: impl Into<String>) -> Self {
        CoreError::Numerics {
            context: context.into(),
            reason: reason.into(),
        }
    }
}
