//! CLI error classes and their exit codes.

use std::fmt;

/// Everything that can abort a run, grouped by exit code:
/// 2 for configuration problems, 3 for numerical failures, 4 for requests
/// outside a method's validity regime, 1 for I/O.
#[derive(Debug)]
pub enum CliError {
    /// Malformed config file (TOML syntax, wrong type, unknown key).
    Parse(String),
    /// Well-formed config violating invariants; one entry per violation.
    Validation(Vec<String>),
    Lib(tavis::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use tavis::Error::*;
        match self {
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Lib(e) => match e {
                DimensionMismatch { .. } | InvalidParams(_) | InvalidKet(_) => 2,
                StepTooLarge(_) | NonConvergence(_) | IllConditioned(_)
                | SingularResolvent { .. } => 3,
                RegimeViolation(_) | GridTooShort(_) | NormViolation(_)
                | ExcitationOverflow { .. } => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "config parse error: {msg}"),
            CliError::Validation(items) => {
                writeln!(f, "config validation failed:")?;
                for item in items {
                    writeln!(f, "  - {item}")?;
                }
                Ok(())
            }
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<tavis::Error> for CliError {
    fn from(e: tavis::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
