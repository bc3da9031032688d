use thiserror::Error;

use crate::parser::ParseError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("FileNotFound: {0}")]
    FileNotFound(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{file}: {error}")]
    Parse { file: String, error: ParseError },
    #[error("no {0} declared")]
    Missing(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse { .. } => 3,
            CliError::FileNotFound(_) | CliError::Io { .. } | CliError::Missing(_) | CliError::Domain(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::FileNotFound(_) => "file-not-found",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Missing(_) => "missing",
            CliError::Domain(_) => "domain",
        }
    }
}
