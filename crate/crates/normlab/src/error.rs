use normlab_core::Error;
use serde_json::json;

/// Failures of a CLI invocation, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Capability(String),
    /// A computed check did not hold.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Capability(_) => 3,
            CliError::Check(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
            CliError::Capability(_) => "capability",
            CliError::Check(_) => "check",
        }
    }

    /// One-line JSON diagnostic.
    pub fn diagnostic(&self) -> String {
        json!({"error": self.kind(), "exit": self.exit_code(), "message": self.to_string()}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capability(_) => CliError::Capability(e.to_string()),
            Error::NotIsometry { .. } => CliError::Check(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}
