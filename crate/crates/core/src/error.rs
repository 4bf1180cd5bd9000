use thiserror::Error;

use crate::dimanal::HomogeneityReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("system is not dimensionally homogeneous\n{0}")]
    Inhomogeneous(Box<HomogeneityReport>),
    #[error("inconsistent dimension for constant `{name}`: {first} vs {second}")]
    InconsistentConstant {
        name: String,
        first: String,
        second: String,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } => 2,
            Error::Inhomogeneous(_) | Error::InconsistentConstant { .. } => 3,
            Error::Unsupported(_) => 4,
            Error::Invariant(_) => 5,
            Error::Invalid(_) => 1,
        }
    }

    pub fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
