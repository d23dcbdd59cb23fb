use alloc::string::String;
use core::fmt;

/// Errors raised by the optimizer and its building blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    InvalidArgument(String),
    /// An internal state value left its admissible range.
    InvalidState(String),
    /// The run configuration failed validation; every violation is listed.
    InvalidConfig(alloc::vec::Vec<String>),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
            Error::InvalidConfig(problems) => {
                write!(f, "invalid configuration: ")?;
                for (i, p) in problems.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for Error {}
