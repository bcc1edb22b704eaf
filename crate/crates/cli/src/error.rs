use std::fmt;

use expander_core::Error as CoreError;

/// Exit status of a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    GateFailure = 1,
    ConfigError = 2,
    ComputationError = 3,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("gate failure: {0}")]
    Gate(String),
    #[error("computation error: {0}")]
    Computation(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Config(_) => Status::ConfigError,
            CliError::Gate(_) => Status::GateFailure,
            CliError::Computation(_) | CliError::Io { .. } => Status::ComputationError,
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_) | CoreError::PoleProximity { .. } => CliError::Config(e.to_string()),
            CoreError::NotAnExpander { .. }
            | CoreError::EigenGate { .. }
            | CoreError::NotConical { .. }
            | CoreError::NoSplitRadius
            | CoreError::NotMeanConvex { .. } => CliError::Gate(e.to_string()),
            _ => CliError::Computation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
