use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unresolved template slot `{{{0}}}`")]
    UnresolvedSlot(String),

    #[error("log-odds denominator is not positive for category `{0}`; increase the prior concentration")]
    NonPositiveDenominator(String),

    #[error("group `{0}` matches no documents")]
    EmptyGroup(String),

    #[error("keyword `{0}` is not in the embedding vocabulary")]
    OutOfVocabulary(String),

    #[error("every keyword is out of vocabulary")]
    AllOutOfVocabulary,

    #[error("mean embedding has zero norm")]
    ZeroNorm,

    #[error("authentication failed: {0}")]
    Auth(String),

    #[error("upstream service error: {0}")]
    Upstream(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for the command-line tool: 1 usage/config, 2 data, 3 upstream.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Auth(_) | Error::Upstream(_) => 3,
            _ => 2,
        }
    }
}
