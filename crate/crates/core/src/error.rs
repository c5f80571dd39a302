use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A function could not be evaluated at a point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{reason} at ({x}, {y})")]
pub struct DomainError {
    pub reason: String,
    pub x: f64,
    pub y: f64,
}

impl DomainError {
    pub fn new(reason: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            reason: reason.into(),
            x,
            y,
        }
    }
}

/// Syntax error in a function expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset into the source where parsing stopped.
    pub offset: usize,
    /// Human-readable descriptions of the tokens that would have been accepted.
    pub expected: Vec<String>,
    /// What was actually found at `offset`.
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at offset {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid operator parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("truncation failure: window on axis {axis} exceeded {max_terms} terms before the series stabilized")]
    TruncationFailure {
        axis: &'static str,
        max_terms: usize,
    },

    #[error("domain error: {0}")]
    Domain(#[from] DomainError),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("unknown catalog function `{0}`")]
    UnknownFunction(String),

    #[error("no closed form for {} moment of order ({i}, {j})", if *.centered { "central" } else { "raw" })]
    UnsupportedOrder { i: u32, j: u32, centered: bool },

    #[error("function `{0}` carries no analytic smoothness metadata")]
    MissingMetadata(String),
}

impl Error {
    /// True for failures that happen while evaluating (as opposed to bad input).
    pub fn is_evaluation_error(&self) -> bool {
        matches!(
            self,
            Error::TruncationFailure { .. } | Error::Domain(_) | Error::Parse(_)
        )
    }
}
