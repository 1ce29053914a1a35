use pidkit_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_OK: u8 = 0;
/// Violations were found (and, under `--expect-fail`, expected).
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{origin}:{line}: {message}")]
    Parse { origin: String, line: usize, message: String },
    #[error("{origin}: {source}")]
    Io {
        origin: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// `--expect-fail` was given but nothing failed, or a replay disagreed.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn parse(origin: &str, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { origin: origin.into(), line, message: message.into() }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                CoreError::UnknownVariable(_)
                | CoreError::UnknownMeasure(_)
                | CoreError::UnknownAxiom(_)
                | CoreError::UnknownAgent(_)
                | CoreError::Argument(_)
                | CoreError::Capacity { .. } => EXIT_USAGE,
                CoreError::Evaluation { .. } => EXIT_INTERNAL,
                _ => EXIT_DATA,
            },
            CliError::Parse { .. } | CliError::Io { .. } | CliError::Json(_) | CliError::Mismatch(_) => EXIT_DATA,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
