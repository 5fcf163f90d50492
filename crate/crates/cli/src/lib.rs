//! Command implementations behind the `drs-lip` binary.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;

pub use commands::{run, Command, RunOptions};
pub use config::Config;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Infeasible(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Infeasible(m) => write!(f, "infeasible plan: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<drs_lip::Error> for CliError {
    fn from(e: drs_lip::Error) -> Self {
        use drs_lip::Error as E;
        match e {
            E::InvalidParameter { .. } | E::PitchTooLarge { .. } | E::NonPositiveStepHeight(_) => {
                CliError::Config(e.to_string())
            }
            E::InfeasibleSchedule(_) | E::NlpNotConverged { .. } | E::NlpInfeasible { .. } => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
