use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments outside an operation's domain.
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("{value} is not invertible mod {p}")]
    NonInvertible { value: u64, p: u64 },

    #[error("zero denominator at ({i}, {j}) mod {p}")]
    ZeroDenominator { i: u64, j: u64, p: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
