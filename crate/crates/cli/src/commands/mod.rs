pub mod bench;
pub mod generate;
pub mod solve;
pub mod verify;

use spdeq_core::Error;

/// CLI-level error with the exit-code mapping: 2 for usage problems,
/// 3 for I/O and file-format problems.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse(_) | Error::Json(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
