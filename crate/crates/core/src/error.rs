use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model file is corrupt: {0}")]
    ModelFormat(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("degenerate ratings: expected weighted disagreement is zero, kappa is undefined")]
    DegenerateRatings,

    #[error("prompt {prompt}: {source}")]
    Prompt {
        prompt: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn in_prompt(self, prompt: &str) -> Self {
        match self {
            e @ Error::Prompt { .. } => e,
            e => Error::Prompt {
                prompt: prompt.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through prompt context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Prompt { source, .. } => source.root(),
            e => e,
        }
    }
}
