use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input: bad coordinates, parameters, files.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    /// A well-formed question whose answer is negative, e.g. a set that was
    /// required to percolate but does not.
    #[error("{0}")]
    Domain(String),

    #[error("search budget of {budget} candidates exceeded; {progress}")]
    Budget { budget: u64, progress: String },

    /// A proved property failed to hold. Never expected to fire.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code for this error class (0 is reserved for success).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Invariant(_) => 1,
            Error::Input(_) | Error::UnsupportedTopology(_) | Error::Io(_) => 2,
            Error::Budget { .. } => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
