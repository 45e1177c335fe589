use serde::Serialize;
use thiserror::Error;

/// Failures that stop a run before a report is complete.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] xyzglass_core::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_string(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for capacity, 4 for file system errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(xyzglass_core::Error::Capacity { .. }) => 3,
            Self::Io { .. } => 4,
            Self::Config(_) | Self::Core(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            3 => "capacity",
            4 => "io",
            _ => "config",
        }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        }
    }
}

/// What goes to stderr as a single JSON line.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
}
