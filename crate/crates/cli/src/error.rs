//! CLI error taxonomy and exit codes.
//!
//! Exit code 1 flags a quantitative failure (a model check missed its
//! target, or a run asked for more key than exists); exit code 2 flags
//! usage, configuration and I/O problems. The tools never panic on bad
//! input.

use satqkd_core::config::ConfigError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Configuration or input problem: exit code 2.
    Config(String),
    /// Filesystem problem: exit code 2.
    Io(String),
    /// The computation ran but failed a quantitative gate: exit code 1.
    Quantitative(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Quantitative(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::Io(msg) => write!(f, "{msg}"),
            CliError::Quantitative(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError::Config(err.to_string())
    }
}
