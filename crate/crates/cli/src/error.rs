use std::fmt;

use crowdkb_core::analytics::AnalyticsError;
use crowdkb_core::{CampaignError, CatalogError, GraphError, ModerationError, QueryError, VocabularyError};

/// Whether a failure stems from bad invocation or from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Domain,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Domain => 1,
            ErrorKind::Usage => 2,
        }
    }
}

/// A command failure with a stable code, printed as `error[code]: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Usage, code: "Usage".into(), message: message.into() }
    }

    pub fn domain(code: impl Into<String>, message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Domain, code: code.into(), message: message.into() }
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        CliError::domain("Io", format!("{}: {err}", path.display()))
    }

    /// A failed write to stdout. A closed pipe (`crowdkb ... | head`) is not
    /// reported.
    pub fn output(err: std::io::Error) -> Self {
        let code = if err.kind() == std::io::ErrorKind::BrokenPipe { "BrokenPipe" } else { "Io" };
        CliError::domain(code, err.to_string())
    }

    pub fn is_broken_pipe(&self) -> bool {
        self.code == "BrokenPipe"
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

macro_rules! domain_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::domain(e.code(), e.to_string())
            }
        }
    )*};
}

domain_from!(CampaignError, CatalogError, GraphError, ModerationError, QueryError, VocabularyError, AnalyticsError);
