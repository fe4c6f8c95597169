use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI error category.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A caller passed something that does not refer to the instance
    /// (unknown vertex, edge not in the matching, bad parameter).
    #[error("input error: {0}")]
    Input(String),

    /// A domain invariant does not hold. Carries every violation found.
    #[error("invariant violated: {}", .0.join("; "))]
    Validation(Vec<String>),

    /// Document could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Instance exceeds the exhaustive oracle's enumeration cap.
    #[error("capacity error: {edges} edges exceeds the enumeration cap of {cap}; use a smaller instance")]
    Capacity { edges: usize, cap: usize },

    /// BP extraction selected edges sharing a vertex.
    #[error("ambiguous optimum: extracted edges {0:?} are not a matching; perturb the weights")]
    AmbiguousOptimum(Vec<(usize, usize)>),

    /// A structure that admits no fractional witness.
    #[error("no witness: {0}")]
    NoWitness(String),

    /// Should be unreachable for inputs produced by this library.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(vec![msg.into()])
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
