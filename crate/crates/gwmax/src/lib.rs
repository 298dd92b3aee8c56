//! File formats, parallel execution and the command-line interface for
//! [`gwmax_core`].

pub mod cli;
pub mod json;
pub mod report;
pub mod runner;

use gwmax_core::Error;

/// Errors reported by the CLI, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed arguments or input files.
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Law(#[from] Error),
    #[error("{0}")]
    Io(String),
    /// A verification run produced a FAIL verdict.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for invalid input, 1 for failed verification and runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Law(e) if e.is_invalid_input() => 2,
            CliError::Law(_) | CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

pub(crate) fn io_error(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
