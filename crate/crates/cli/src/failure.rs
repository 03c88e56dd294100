//! Exit codes by failure class.

use std::fmt;
use std::process::ExitCode;

use deblur::DeblurError;

pub const EXIT_FLAGS: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;
pub const EXIT_GUARD: u8 = 5;
pub const EXIT_HIERARCHY: u8 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn flags(message: impl Into<String>) -> Self {
        Self::new(EXIT_FLAGS, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(EXIT_IO, message)
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code)
    }

    /// Reclassifies structural errors raised while building a level hierarchy.
    pub fn in_hierarchy(err: DeblurError) -> Self {
        match err {
            DeblurError::TooDeep { .. }
            | DeblurError::NotSeparable
            | DeblurError::NotPowerOfTwo(_)
            | DeblurError::OddDimension(_)
            | DeblurError::UnsupportedSize(_) => Self::new(EXIT_HIERARCHY, err.to_string()),
            other => other.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<DeblurError> for CliError {
    fn from(err: DeblurError) -> Self {
        use DeblurError::*;
        let code = match &err {
            Io(_) | MalformedFile(_) | Csv(_) => EXIT_IO,
            NotBracketed { .. }
            | NotConverged(_)
            | SingularOperator
            | NullSpaceOverlap
            | FlatCurve
            | TooFewPoints(_)
            | ZeroSignal
            | ZeroReference => EXIT_SOLVER,
            TooLarge(..) => EXIT_GUARD,
            TooDeep { .. } | NotPowerOfTwo(_) | OddDimension(_) => EXIT_HIERARCHY,
            _ => EXIT_FLAGS,
        };
        Self::new(code, err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::io(err.to_string())
    }
}
