use std::io;

use thiserror::Error;

/// Process exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Process exit status for malformed or invalid input.
pub const EXIT_INPUT: i32 = 2;
/// Process exit status for degenerate data or solver non-convergence.
pub const EXIT_NUMERICAL: i32 = 3;
/// Process exit status for command-line usage errors.
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-unit descriptor at line {line} (norm {norm}); pass --renormalize to accept raw embeddings")]
    NonUnit { line: usize, norm: f64 },
    #[error("no statistically valid descriptors")]
    NoValidDescriptors,
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] mrdesc_core::Error),
}

impl CliError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { line, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_INPUT,
        }
    }

    /// Short machine-readable identifier, reported next to the message.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "malformed_input",
            CliError::NonUnit { .. } => "non_unit_descriptor",
            CliError::NoValidDescriptors => "no_valid_descriptors",
            CliError::Input(_) => "invalid_input",
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "unreadable_input",
            CliError::Write(_) => "write_failed",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_NUMERICAL => "numerical",
            _ => "input",
        }
    }

    /// The error as a JSON object: `{"error": {"code", "kind", "message"}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": {
                "code": self.code(),
                "kind": self.kind(),
                "message": self.to_string(),
            }
        })
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
