use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prime index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("prime table of {count} primes exhausted: {context}")]
    TableExhausted { count: usize, context: &'static str },

    #[error("refusing to build a table of {0} primes (limit is 10^9)")]
    TableTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid prime cache: {0}")]
    BadCache(String),

    #[error("no feasible candidate within the enumeration budget of {0} expansions")]
    BudgetExhausted(usize),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
