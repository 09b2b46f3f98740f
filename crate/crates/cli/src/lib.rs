//! Library side of the `fbud` command-line tool.

pub mod commands;
pub mod config;

use std::path::PathBuf;

pub use commands::Session;
pub use config::{AmplitudeSource, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] fbud_core::Error),

    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for failed checks, 2 for usage, configuration and I/O problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}
