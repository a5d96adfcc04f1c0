use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] vqeg_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: malformed matrix file: {source}")]
    MatrixParse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 1 for usage and parse errors, 2 for solver and run
    /// failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::MatrixParse { .. } => 1,
            Error::Core(vqeg_core::Error::InvalidConfig(_) | vqeg_core::Error::InvalidArgument(_)) => 1,
            _ => 2,
        }
    }
}
