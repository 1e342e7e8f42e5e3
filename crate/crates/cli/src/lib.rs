//! Experiment runner around `fmm-core`: config loading, seeded orchestration
//! of (model, seed) cells, movement-trace export in ns-2 setdest form, and
//! metrics/plot-data emission.

pub mod config;
pub mod experiment;
pub mod trace;

pub use config::{load_config, parse_config, SimConfig, TableSource};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration invalid:\n{0}")]
    Config(String),

    #[error("{path}: {message}")]
    File { path: String, message: String },

    #[error("trace line {line}: {message}")]
    Trace { line: usize, message: String },

    #[error("{context}: {source}")]
    Run {
        context: String,
        #[source]
        source: fmm_core::Error,
    },

    #[error(transparent)]
    Core(#[from] fmm_core::Error),
}

impl CliError {
    pub fn file(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::File {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn trace(line: usize, message: impl Into<String>) -> Self {
        CliError::Trace {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
