use thiserror::Error;

use crate::symbol::Degree;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error(
        "term at position {pos} is not homogeneous: monomials of degrees {first} and {second}"
    )]
    NonHomogeneous {
        pos: usize,
        first: Degree,
        second: Degree,
    },

    #[error("denominator at position {pos} must be a power of |xi|")]
    BadDenominator { pos: usize },

    #[error("matrix size mismatch: expected {expected}, found {found}")]
    MatrixSize { expected: usize, found: usize },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("leading term must be radial (c|xi|^m on every diagonal entry)")]
    NonRadialLeading,

    #[error("leading coefficient must be positive, found {0}")]
    NonPositiveLeading(String),

    #[error("empty symbol")]
    EmptySymbol,

    #[error("log symbol truncated at degree {have} does not reach degree {needed}; increase J")]
    TruncationTooCoarse { needed: Degree, have: Degree },

    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(Degree, Degree),

    #[error("model operator requires even m > sigma + n (m = {m}, sigma + n = {bound})")]
    ModelPrecondition { m: Degree, bound: Degree },

    #[error("radial master integral has a pole at s/m = {0}")]
    MasterIntegralPole(Degree),

    #[error("{0}")]
    Domain(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
