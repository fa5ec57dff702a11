use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of subdivision depth.
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {estimate:e})")]
    Quadrature { a: f64, b: f64, estimate: f64 },

    /// Malformed map text.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Arity or dimension mismatch while building a map.
    #[error("dimension error in `{node}`: {message}")]
    Dimension { node: String, message: String },

    /// Parameters violate an ordering the construction needs.
    #[error("invalid parameters: {0}")]
    Params(String),

    /// An input map does not satisfy a checked precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn params(msg: impl Into<String>) -> Error {
    Error::Params(msg.into())
}
