use thiserror::Error;

/// Errors raised by constructions and checks in this crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid form parameters D={d}, s={s}, n={n}: {reason}")]
    InvalidSpec {
        d: u32,
        s: u32,
        n: u32,
        reason: String,
    },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("the p-adic valuation of zero is undefined")]
    ZeroValuation,

    #[error("t = {0} is a pole")]
    Pole(String),

    #[error("series for zeta({0}, ..) diverges")]
    Divergent(u32),

    #[error("no convergence after {terms} terms")]
    NonConvergence { terms: usize },

    #[error("root bracket failed: {0}")]
    BracketFailure(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
