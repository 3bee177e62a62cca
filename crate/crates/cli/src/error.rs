use std::fmt;

use toral_core::Error as CoreError;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    UnknownCommand(String),
    Config(String),
    /// Every problem found while validating a configuration.
    Validation(Vec<String>),
    Core(CoreError),
    Io(std::io::Error),
}

impl CliError {
    /// `2` for budget and overflow failures, `1` for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Overflow { .. } | CoreError::BudgetExceeded { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::UnknownCommand(c) => write!(f, "unknown command `{c}`"),
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Validation(problems) => {
                writeln!(f, "invalid configuration:")?;
                for p in problems {
                    writeln!(f, "  - {p}")?;
                }
                Ok(())
            }
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
