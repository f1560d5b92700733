use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid experiment configuration (even ring, non-unit vectors, bad flags).
    #[error("configuration error: {0}")]
    Config(String),

    /// Operand shapes do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Argument outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density matrix: smallest eigenvalue {min_eigenvalue:e}")]
    InvalidDensity { min_eigenvalue: f64 },

    #[error("fit window error: {0}")]
    FitWindow(String),

    #[error("no decay: fitted slope {slope:e} is not negative")]
    NoDecay { slope: f64 },

    #[error("size guard exceeded: {what} = {actual} > {limit}")]
    Size {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("observer aborted at t = {t}: {message}")]
    Observer { t: usize, message: String },

    #[error("quench sample {index} failed: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
