use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("regime error: {0}")]
    Regime(String),
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("box error: {0}")]
    Box(String),
    #[error("quadrature error: {0}")]
    Quadrature(String),
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
