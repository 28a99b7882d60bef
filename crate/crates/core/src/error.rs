use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A kernel matrix (or Schur complement) failed to factor.
    #[error("numerical error: {message} (try jitter >= {suggested_jitter:e})")]
    Numerical {
        message: String,
        suggested_jitter: f64,
    },

    /// Rejection sampling gave up before collecting the requested draws.
    #[error(
        "rejection sampling exhausted after {tries} tries with {accepted} of {requested} accepted \
         (acceptance rate ~ {acceptance_rate:e})"
    )]
    EfficiencyExhausted {
        tries: u64,
        accepted: usize,
        requested: usize,
        acceptance_rate: f64,
    },

    #[error("evaluation of point {index} timed out after {seconds} s")]
    Timeout { index: usize, seconds: f64 },

    #[error("protocol error: {message}; payload: {excerpt:?}")]
    Protocol { message: String, excerpt: String },

    /// The endpoint could not be reached.
    #[error("transport error: {0}")]
    Transport(String),

    #[error("external process error: {0}")]
    Process(String),

    #[error("evaluator failed: {0}")]
    Evaluator(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn protocol(message: impl Into<String>, payload: &str) -> Self {
        let excerpt: String = payload.chars().take(200).collect();
        Error::Protocol {
            message: message.into(),
            excerpt,
        }
    }
}
