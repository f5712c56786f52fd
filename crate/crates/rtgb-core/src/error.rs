use alloc::string::String;
use core::fmt;

/// Errors produced by model construction, training, and rule handling.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector or matrix had the wrong length for the declared shape.
    DimMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A configuration value was rejected at entry.
    InvalidConfig { what: &'static str, detail: String },
    /// Exact enumeration was requested for a hidden layer too large to enumerate.
    HiddenTooLarge { hidden: usize, limit: usize },
    /// A parameter became non-finite during training.
    NonFinite {
        what: &'static str,
        epoch: usize,
        sequence: usize,
    },
    /// Could not place non-overlapping balls after the allowed attempts.
    Placement { ball: usize, attempts: usize },
    /// A rule file line failed to parse.
    RuleParse { line: usize, message: String },
    /// An operation received no data to work on.
    EmptyInput { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected length {expected}, got {got}"),
            Error::InvalidConfig { what, detail } => write!(f, "invalid {what}: {detail}"),
            Error::HiddenTooLarge { hidden, limit } => write!(
                f,
                "exact enumeration needs at most {limit} hidden units, model has {hidden}"
            ),
            Error::NonFinite {
                what,
                epoch,
                sequence,
            } => write!(
                f,
                "{what} became non-finite at epoch {epoch}, sequence {sequence}"
            ),
            Error::Placement { ball, attempts } => write!(
                f,
                "could not place ball {ball} without overlap after {attempts} attempts"
            ),
            Error::RuleParse { line, message } => write!(f, "rule file line {line}: {message}"),
            Error::EmptyInput { what } => write!(f, "{what} is empty"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
