use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module of the core crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two operands disagree on a dimension.
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    /// Invalid hyperparameter or option.
    Config(String),
    /// View count or per-view row/column structure disagrees.
    ViewMismatch(String),
    /// The bordered system could not be solved.
    SingularSystem(String),
    /// One of the two classes is empty.
    DegenerateClass(String),
    /// A diagnostic was requested for a model it does not apply to.
    UnsupportedCheck(String),
    /// Malformed input data. `row` is 1-based when known.
    Ingest { row: Option<usize>, message: String },
    /// Every grid configuration failed during cross-validation.
    Tuning(String),
    /// Invalid input to the rank statistics.
    Stats(String),
}

impl Error {
    pub(crate) fn dim(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            found,
        }
    }

    pub(crate) fn ingest(message: impl Into<String>) -> Self {
        Error::Ingest {
            row: None,
            message: message.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::SingularSystem(_) | Error::Tuning(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension {
                what,
                expected,
                found,
            } => {
                write!(
                    f,
                    "dimension mismatch in {what}: expected {expected}, found {found}"
                )
            }
            Error::Config(m) => write!(f, "invalid configuration: {m}"),
            Error::ViewMismatch(m) => write!(f, "view mismatch: {m}"),
            Error::SingularSystem(m) => write!(f, "singular system: {m}"),
            Error::DegenerateClass(m) => write!(f, "degenerate class: {m}"),
            Error::UnsupportedCheck(m) => write!(f, "unsupported check: {m}"),
            Error::Ingest {
                row: Some(r),
                message,
            } => write!(f, "ingest error at row {r}: {message}"),
            Error::Ingest { row: None, message } => write!(f, "ingest error: {message}"),
            Error::Tuning(m) => write!(f, "tuning failed: {m}"),
            Error::Stats(m) => write!(f, "statistics error: {m}"),
        }
    }
}

impl core::error::Error for Error {}
