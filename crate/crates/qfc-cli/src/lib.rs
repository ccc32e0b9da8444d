//! Declarative scenario runner: parses config files, orchestrates the CW and
//! pulsed pipelines, and emits figure-ready CSV/JSON with a complete output
//! manifest.

pub mod config;
pub mod converge;
pub mod oracle;
pub mod outputs;
pub mod presets;
pub mod runner;
pub mod scenario;
pub mod studies;

/// Error category controlling the process exit code: 2 for configuration
/// problems, 3 for numerical failures.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "configuration error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
            AppError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Numerical(_) => 3,
            AppError::Io(_) => 1,
        }
    }
}

impl From<qfc_core::CoreError> for AppError {
    fn from(e: qfc_core::CoreError) -> Self {
        use qfc_core::CoreError::*;
        match &e {
            Numerics { .. } => AppError::Numerical(e.to_string()),
            Io(_) => AppError::Io(std::io::Error::other(e.to_string())),
            _ => AppError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

pub type AppResult<T> = Result<T, AppError>;
