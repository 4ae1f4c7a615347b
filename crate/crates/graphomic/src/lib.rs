//! IO, file formats, plotting, and the sweep driver for the
//! `graphomic` CLI. The algorithms live in `graphomic-core`; this
//! crate only moves data in and out of them.

pub mod commands;
pub mod config;
pub mod ingest;
pub mod io;
pub mod report;
pub mod svg;
pub mod sweep;

/// Application-level error carrying the exit-code category.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid configuration or CLI usage (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// Unreadable or inconsistent data (exit code 3).
    #[error("data error: {0}")]
    Data(String),
    /// Anything else (exit code 1).
    #[error("{0}")]
    Other(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) => 3,
            AppError::Other(_) => 1,
        }
    }
}

impl From<graphomic_core::eval::EvalError> for AppError {
    fn from(e: graphomic_core::eval::EvalError) -> Self {
        AppError::Data(e.to_string())
    }
}
