use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-finite or otherwise malformed numeric input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter outside its admissible range (radius, delta, dimension, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    /// The simulation protocol was violated: out-of-order delivery, a missing
    /// time stamp, a feedback item the learner cannot match.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("feedback error: {0}")]
    Feedback(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A probe point fell outside the feasible set.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("learner state corrupted: {0}")]
    StateCorruption(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
