use thiserror::Error;

/// Errors surfaced by the library.
///
/// The variants map onto the CLI exit codes: input problems (2), size guard
/// overflows (3) and internal invariant failures (4).
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DrcError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("size guard exceeded: {what} (limit {limit}, partial count {partial})")]
    Guard {
        what: String,
        limit: usize,
        partial: usize,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl DrcError {
    pub fn input(msg: impl Into<String>) -> Self {
        DrcError::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        DrcError::Invariant(msg.into())
    }

    pub fn guard(what: impl Into<String>, limit: usize, partial: usize) -> Self {
        DrcError::Guard {
            what: what.into(),
            limit,
            partial,
        }
    }

    /// Process exit code used by the `drc` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            DrcError::Input(_) | DrcError::Io(_) => 2,
            DrcError::Guard { .. } => 3,
            DrcError::Invariant(_) => 4,
        }
    }
}

impl From<std::io::Error> for DrcError {
    fn from(e: std::io::Error) -> Self {
        DrcError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DrcError>;
