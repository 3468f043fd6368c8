use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input does not have the shape of the type it claims to be.
    #[error("malformed input: {0}")]
    Malformed(String),

    /// Input is well formed but outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Enumeration would exceed the configured budget.
    #[error("budget exceeded: predicted {predicted} objects, budget {budget}")]
    Budget { predicted: String, budget: u64 },

    #[error("numeric error: {0}")]
    Numeric(String),

    /// A series computation produced a value that cannot be right.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("network error: {0}")]
    Network(String),

    #[error("sequence {0} unavailable: no network, no cache, no embedded prefix")]
    Unavailable(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short stable tag, used by the CLI for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "malformed",
            Error::Domain(_) => "domain",
            Error::Budget { .. } => "budget",
            Error::Numeric(_) => "numeric",
            Error::Consistency(_) => "consistency",
            Error::Parse { .. } => "parse",
            Error::Network(_) => "network",
            Error::Unavailable(_) => "unavailable",
            Error::Alignment(_) => "alignment",
            Error::Io { .. } => "io",
        }
    }
}
