use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unresolved symbol `{0}`: no finite set with that name is declared")]
    UnresolvedSymbol(String),

    #[error("enumeration too large: {} values exceed the guard of {guard}", display_cardinality(*.cardinality))]
    EnumerationTooLarge {
        /// `None` when the cardinality does not fit in 128 bits.
        cardinality: Option<u128>,
        guard: u128,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("carrier mismatch: expected `{expected}`, found `{found}`")]
    CarrierMismatch { expected: String, found: String },

    #[error("functor mismatch between `{left}` and `{right}`")]
    FunctorMismatch { left: String, right: String },

    #[error("unsupported constructor: {0}")]
    Unsupported(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unresolved name `{0}`")]
    UnresolvedName(String),

    #[error("formula contains an atomic proposition but no natural transformation was supplied")]
    MissingNu,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("internal error: {0}")]
    Internal(String),
}

fn display_cardinality(c: Option<u128>) -> String {
    match c {
        Some(n) => n.to_string(),
        None => "more than 2^128".to_string(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
