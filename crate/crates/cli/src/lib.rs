//! Scenario-driven front end for `nlmarkov`: configuration, run orchestration and the acceptance suite.

pub mod checks;
pub mod commands;
pub mod scenario;
pub mod suite;

pub use commands::{compare, sensitivity, simulate};
pub use scenario::{Scenario, SCHEMA};
pub use suite::{run_suite, CriterionResult, Suite};

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("well-posedness failure: {0}")]
    WellPosedness(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::WellPosedness(_) => 2,
            CliError::Other(_) => 1,
        }
    }
}

impl From<nlmarkov::Error> for CliError {
    fn from(e: nlmarkov::Error) -> Self {
        match e {
            nlmarkov::Error::WellPosedness(_) | nlmarkov::Error::Divergence { .. } => CliError::WellPosedness(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
