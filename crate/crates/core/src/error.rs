use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied configuration (register size, scenario values, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("backend failure during {context}: {source}")]
    Backend {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("mitigation error: {message} (condition estimate {condition:.3e})")]
    Mitigation { message: String, condition: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("incompatible schema version {found} (expected {expected})")]
    Incompatible { found: u32, expected: u32 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps a failure with the experiment or job step it happened in.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::Backend {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, looking through backend context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Backend { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Incompatible { .. } => 2,
            Error::Config(_) => 3,
            Error::Backend { .. } => 4,
            Error::Fit(_) => 5,
            Error::Mitigation { .. } => 6,
            Error::Io { .. } => 7,
            Error::Contract(_) => 8,
        }
    }
}
