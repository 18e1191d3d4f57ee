use thiserror::Error;

use crate::number_theory::Natural;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `x` shares a factor with `n`, so `x^r = 1 (mod n)` has no solution.
    #[error("{x} has no multiplicative order modulo {n} (gcd = {gcd})")]
    NoOrder {
        x: Natural,
        n: Natural,
        gcd: Natural,
    },

    /// A desk-scale guard was exceeded.
    #[error("resource guard exceeded: {0}")]
    Resource(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
