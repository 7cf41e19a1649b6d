use std::io;
use std::path::PathBuf;

use patchrecall_core::dense::DenseError;
use patchrecall_core::eval::EvalError;
use patchrecall_core::sparse::SparseError;
use patchrecall_core::ArgumentError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown instance {0}")]
    UnknownInstance(String),
    #[error("no snapshot for {instance}: {reason}")]
    Unresolvable { instance: String, reason: String },
    #[error("no files under {0} matched the include globs")]
    EmptyCorpus(PathBuf),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Argument(#[from] ArgumentError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 usage/config, 3 data resolution, 4 pipeline.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            Error::Io { .. }
            | Error::Record { .. }
            | Error::UnknownInstance(_)
            | Error::Unresolvable { .. }
            | Error::EmptyCorpus(_)
            | Error::Format { .. } => 3,
            Error::Sparse(SparseError::Argument(_)) => 2,
            Error::Sparse(SparseError::EmptyCorpus) => 3,
            Error::Dense(DenseError::Argument(_)) => 2,
            Error::Eval(EvalError::Argument(_)) => 2,
            Error::Dense(_) | Error::Sparse(_) | Error::Eval(_) => 4,
        }
    }
}
