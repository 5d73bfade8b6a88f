use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] pirlab_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },

    #[error("cannot encode: {0}")]
    Encode(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("endpoint {endpoint}: {reason}")]
    Endpoint { endpoint: String, reason: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("bad input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: io::Error) -> Self {
        Error::Io { context: context.into(), source }
    }
}
