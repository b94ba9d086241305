use std::fmt::Display;
use std::path::Path;

/// A failure reported as `error[CODE]: message`.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        CliError::new("E_IO", format!("{}: {}", path.display(), e))
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("E_USAGE", message)
    }
}

impl From<signet_core::Error> for CliError {
    fn from(e: signet_core::Error) -> Self {
        CliError { code: e.code(), message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("E_JSON", e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
