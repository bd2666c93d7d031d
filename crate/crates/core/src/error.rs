use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the workbench.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// A party or randomizer violated the round structure.
    #[error("party {party}, round {round}: {reason}")]
    Structure { party: usize, round: usize, reason: String },
    /// A byte string is not a valid canonical encoding.
    #[error("malformed encoding: {0}")]
    Decode(String),
    /// A parameter is outside the range the operation accepts.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    /// Two group elements or vectors live in different groups.
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },
    /// Exact enumeration would exceed the configured branch budget.
    #[error("enumeration needs {branches} weighted branches, budget is {budget}")]
    BudgetExceeded { branches: u128, budget: u128 },
    /// Replaying a recorded random tape did not match the randomizer.
    #[error("tape replay: {0}")]
    Replay(String),
    /// An internal consistency check failed.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
