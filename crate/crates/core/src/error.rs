use thiserror::Error;

/// Errors raised by the algebra, the category layer and the text formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Arity, order, dimension or index mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// A value substituted for a fiber variable has a p-degree-0 part.
    #[error("filtration error: {0}")]
    Filtration(String),

    /// A filtered fixed-point iteration failed to contract.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// S(0, x) is not identically zero.
    #[error("normal-form error: S(0,x) != 0, offending terms: {0}")]
    NormalForm(String),

    /// A germ or relation failed a structural validity check.
    #[error("validity error: {0}")]
    Validity(String),

    /// The core map is outside the class supported by germ extraction.
    #[error("unsupported core: {0}")]
    UnsupportedCore(String),

    /// Text input did not conform to the grammar.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A postcondition that must hold for valid inputs did not.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
