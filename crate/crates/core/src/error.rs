use alloc::string::String;
use core::fmt;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shapes, counts or parameters that violate a precondition.
    InvalidInput(String),
    /// Data that is well-formed but numerically unusable (zero variance, rank deficiency).
    DegenerateData(String),
    /// An iterative numeric routine failed.
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::DegenerateData(msg) => write!(f, "degenerate data: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::error::Error::InvalidInput(alloc::format!($($arg)*)) };
}
macro_rules! degenerate {
    ($($arg:tt)*) => { $crate::error::Error::DegenerateData(alloc::format!($($arg)*)) };
}
pub(crate) use degenerate;
pub(crate) use invalid;
