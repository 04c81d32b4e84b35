use std::path::PathBuf;

use fareyphase_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("output: {0}")]
    Stdout(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core { source, .. } => match source {
                CoreError::LevelTooLarge { .. }
                | CoreError::LevelTooSmall { .. }
                | CoreError::Domain { .. }
                | CoreError::IndexOutOfRange { .. }
                | CoreError::Invalid(_) => EXIT_USAGE,
                CoreError::Overflow { .. }
                | CoreError::NoConvergence { .. }
                | CoreError::StepCollision { .. }
                | CoreError::TruncationTooCoarse { .. } => EXIT_NUMERIC,
            },
            CliError::Io { .. } | CliError::Stdout(_) | CliError::Pool(_) | CliError::Json(_) => EXIT_NUMERIC,
        }
    }
}

/// Attaches a human-readable context to core errors.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core { context: what(), source })
    }
}
