use std::fmt;

/// Errors produced by the library.
///
/// `Infeasible`, `DegenerateSamples` and `SingularSystem` describe analysis
/// outcomes (a bound that does not apply, a test that cannot be run, a chain
/// without a solution); everything else is a usage or I/O problem.
#[derive(Debug)]
pub enum Error {
    /// A parameter violates a documented precondition.
    InvalidParameter(String),
    /// The requested problem size exceeds what exact enumeration supports.
    Capacity { n: usize, cap: usize },
    /// The hitting-time system has no unique solution.
    SingularSystem(String),
    /// A statistical test cannot be computed from these samples.
    DegenerateSamples(String),
    /// A summary was requested for an empty sample.
    EmptySample,
    /// The requested bound does not hold for these parameters.
    Infeasible(String),
    /// Batch results do not share a common size grid.
    GridMismatch(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Capacity { n, cap } => {
                write!(f, "n = {n} exceeds the exact-enumeration cap of {cap}")
            }
            Error::SingularSystem(msg) => write!(f, "singular hitting-time system: {msg}"),
            Error::DegenerateSamples(msg) => write!(f, "degenerate samples: {msg}"),
            Error::EmptySample => write!(f, "empty sample"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::GridMismatch(msg) => write!(f, "mismatched size grids: {msg}"),
            Error::Io(e) => write!(f, "i/o error: {e}"),
            Error::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Json(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e)
    }
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for outcomes that describe the analysis rather than its usage:
    /// an inapplicable bound, a degenerate test, an unsolvable chain.
    pub fn is_analysis_outcome(&self) -> bool {
        matches!(
            self,
            Error::Infeasible(_) | Error::DegenerateSamples(_) | Error::SingularSystem(_)
        )
    }
}
