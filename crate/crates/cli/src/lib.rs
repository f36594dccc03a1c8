//! Batch runner behind the `multispec` binary.
//!
//! Each run reads a TOML config, evaluates one experiment and writes
//! `results.csv`, `report.json` and `manifest.json` into a per-run directory.
//! Failed runs also leave a `FAILED` marker next to whatever was produced.

pub mod config;
pub mod experiments;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("solver blow-up after t = {0}")]
    BlowUp(f64),

    #[error("computation failed: {0}")]
    Compute(multispec::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<multispec::Error> for CliError {
    fn from(e: multispec::Error) -> Self {
        match e {
            multispec::Error::Precision(msg) => CliError::Precision(msg),
            other => CliError::Compute(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precision(_) => 3,
            CliError::BlowUp(_) => 4,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}
