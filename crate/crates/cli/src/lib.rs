//! Library side of the `semigroup-forge` command: spec files, reports,
//! trajectory CSV and the subcommand implementations.
//!
//! Exit-code contract: 0 when every required verdict passes, 1 on input
//! errors, 2 when a verdict fails.

pub mod commands;
pub mod json;
pub mod report;
pub mod spec;
pub mod trajectory_csv;

use std::fmt;

/// Version tag written into every emitted file.
pub const FORMAT_VERSION: u32 = 1;

/// Seed used by randomized checks unless `--seed` is given.
pub const DEFAULT_SEED: u64 = semigroup_forge::cp::DEFAULT_SEED;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent input; exit code 1.
    Input(String),
    /// A requested verdict failed; exit code 2.
    Verdict(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Verdict(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Verdict(m) => write!(f, "verdict failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<semigroup_forge::Error> for CliError {
    fn from(e: semigroup_forge::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
