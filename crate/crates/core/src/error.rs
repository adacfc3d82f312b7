use thiserror::Error;

/// Errors raised while building or evaluating expressions, models and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown catalog atom `{0}`")]
    UnknownAtom(String),

    #[error("parameter `{name}` of `{atom}` is {value}, outside the admissible range {range}")]
    ParameterRange {
        atom: String,
        name: String,
        value: f64,
        range: String,
    },

    #[error("missing parameter `{name}` for `{atom}`")]
    MissingParameter { atom: String, name: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid Lévy triple: {0}")]
    Levy(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(value: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if value.is_nan() {
        Err(Error::Domain(what()))
    } else if value.is_infinite() {
        Err(Error::Overflow(what()))
    } else {
        Ok(value)
    }
}
