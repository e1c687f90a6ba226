//! Command implementations behind the `idepca` binary. Every command computes
//! its full output in memory first; files are written only after success.

pub mod commands;
pub mod format;
pub mod problem_file;

use idepca_core::Error as CoreError;

/// Process exit status contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    InvariantFailure = 1,
    Input = 2,
    Numeric = 3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: ExitCode,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: ExitCode::Input,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        CliError {
            code: ExitCode::InvariantFailure,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: ExitCode::Numeric,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = if e.is_input_error() {
            ExitCode::Input
        } else if matches!(e, CoreError::DiagnosticMismatch { .. }) {
            ExitCode::InvariantFailure
        } else {
            ExitCode::Numeric
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
