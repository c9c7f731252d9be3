use std::fmt;

use thiserror::Error;

/// Location and expectation set of a failed parse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    /// Human readable descriptions of tokens that would have been accepted.
    pub expected: Vec<String>,
    /// What was found instead (`end of input` at EOF).
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: expected ", self.offset)?;
        match self.expected.as_slice() {
            [] => write!(f, "nothing")?,
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error {0}")]
    Parse(#[from] ParseError),

    #[error("factorial argument must be the main variable plus a rational constant: {0}")]
    FactorialDomain(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// A sign query could not be resolved from the assumptions in force.
    #[error("assumption needed: sign of {query} is unknown")]
    AssumptionNeeded { query: String },

    #[error("division by exact zero")]
    DivisionByExactZero,

    #[error("undefined at point: {0}")]
    UndefinedAtPoint(String),

    #[error("precision exhausted after {terms} terms")]
    PrecisionExhausted { terms: usize },

    #[error("tower depth limit {0} exceeded")]
    DepthLimit(usize),

    #[error("invalid assumptions: {0}")]
    Assumptions(String),

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("no table row for relation {rel} under {op}")]
    UnsupportedRow { rel: String, op: String },

    #[error("not an indeterminate form: {0}")]
    NotIndeterminate(String),

    #[error("L'Hopital rounds exhausted after {0} rounds")]
    RoundsExhausted(usize),

    /// Internal signal: the current truncation cannot separate terms.
    /// The adaptive driver turns this into a retry or `PrecisionExhausted`.
    #[error("more terms needed")]
    NeedMoreTerms,
}

impl Error {
    pub(crate) fn assumption(query: impl fmt::Display) -> Self {
        Error::AssumptionNeeded { query: query.to_string() }
    }

    /// True for failures caused by undecidable signs or truncation, as
    /// opposed to malformed input.
    pub fn is_undetermined(&self) -> bool {
        matches!(self, Error::AssumptionNeeded { .. } | Error::PrecisionExhausted { .. } | Error::NeedMoreTerms)
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
