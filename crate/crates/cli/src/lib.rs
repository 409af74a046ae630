//! Command-line driver for `softmapper`: run configuration, the `build`,
//! `optimize`, `synth` and `export` commands, synthetic shapes and exporters.

pub mod args;
pub mod commands;
pub mod config;
pub mod export;
pub mod synth;

use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or input data.
    #[error("{0}")]
    Usage(String),
    /// Failure while computing or writing results.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }
}

impl From<softmapper::Error> for CliError {
    fn from(e: softmapper::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
