use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("barcode has {found} positive-persistence bars but the capacity is {capacity}")]
    Capacity { found: usize, capacity: usize },

    #[error(
        "{offending} bar(s) violate b <= m*l for m = {m}; the smallest m that admits them is {required} \
         (use a larger m, the data-driven policy, or clipping)"
    )]
    Regularization {
        offending: usize,
        m: u64,
        required: u64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("refusing exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
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

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// Strips any stage labels and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code: 1 for usage/config problems, 2 for data problems,
    /// 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Parameter(_) | Error::Config(_) => 1,
            Error::Input(_)
            | Error::Capacity { .. }
            | Error::Regularization { .. }
            | Error::Degenerate(_)
            | Error::Parse { .. }
            | Error::Io { .. } => 2,
            Error::TooLarge(_) | Error::Stage { .. } => 3,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
