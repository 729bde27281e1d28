use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run; each class maps to its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write results to {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read bundle {path}: {detail}")]
    Bundle { path: PathBuf, detail: String },
    #[error("run failed: {0}")]
    Runtime(#[from] freqgate::Error),
}

impl CliError {
    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output { path: path.into(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Output { .. } => exit::OUTPUT,
            CliError::Bundle { .. } => exit::BUNDLE,
            CliError::Runtime(_) => exit::RUNTIME,
        }
    }
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const CONFIG: u8 = 2;
    /// The bundle was written but the optimizer missed its fidelity floor.
    pub const UNCONVERGED: u8 = 3;
    pub const RUNTIME: u8 = 4;
    pub const OUTPUT: u8 = 5;
    pub const BUNDLE: u8 = 6;
}
