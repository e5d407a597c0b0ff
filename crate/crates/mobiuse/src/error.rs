use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}:{line}: {what} `{name}` does not occur in the training split", path.display())]
    Unseen {
        path: PathBuf,
        line: usize,
        what: &'static str,
        name: String,
    },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("geometry mismatch: expected {expected}, checkpoint holds {found}")]
    GeometryMismatch { expected: String, found: String },
    #[error("dataset mismatch: {0}")]
    DatasetMismatch(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mobiuse_core::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    /// Process exit code: 1 usage, 2 data, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        use mobiuse_core::Error as Core;
        match self {
            Error::Usage(_) => 1,
            Error::Core(Core::NonFiniteUpdate { .. } | Core::NonFinite(_)) => 3,
            Error::Core(
                Core::InvalidRing { .. } | Core::InvalidConfig(_) | Core::InvalidSurface { .. } | Core::ZeroModulus | Core::EmptyVector,
            ) => 1,
            _ => 2,
        }
    }
}
