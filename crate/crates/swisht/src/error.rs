use std::path::PathBuf;

use swisht_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    /// Bad flag values or combinations.
    #[error("{0}")]
    Usage(String),
    /// A check the command was asked to perform came out negative.
    #[error("{0}")]
    Validation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the caller got wrong on the command line, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_)
            | Self::Core(
                CoreError::InvalidParameter { .. }
                | CoreError::UnknownActivation(_)
                | CoreError::InvalidConfig(_)
                | CoreError::SubsetOutOfRange { .. },
            ) => 2,
            _ => 1,
        }
    }
}
