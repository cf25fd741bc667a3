use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used to pick a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: file is not valid UTF-8")]
    Utf8 { path: PathBuf },

    #[error("duplicate id \"{0}\"")]
    DuplicateId(String),

    #[error("manifest is empty")]
    EmptyManifest,

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown node \"{0}\"")]
    UnknownNode(String),

    #[error("lemma \"{0}\" does not occur in the token stream")]
    AbsentLemma(String),

    #[error("network and token stream disagree: {0}")]
    Inconsistent(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("missing artifact {path}; rerun the `{stage}` stage")]
    MissingArtifact { path: PathBuf, stage: &'static str },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) => ErrorKind::Config,
            Error::Numerical(_) => ErrorKind::Numerical,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

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
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attach a pipeline stage name to errors.
pub(crate) trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| match e {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        })
    }
}
