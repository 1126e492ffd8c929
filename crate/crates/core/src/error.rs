use thiserror::Error;

/// Errors raised by the algebra kernel.
///
/// `Structural` means the operands do not belong to a common algebra
/// (different alphabet, truncation order, strand count, arity).
/// `Domain` means a precondition on the value itself failed (nonzero
/// constant term passed to `exp`, a non-invariant metric, ...).
/// `ContractViolation` is reserved for situations the underlying theory
/// rules out: hitting one means the input data broke a stated hypothesis
/// or there is a bug upstream, and the message says which.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural mismatch: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("paper-contract violation: {0}")]
    ContractViolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
