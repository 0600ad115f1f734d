use thiserror::Error;

/// Errors raised by the entropy calculus and the experiment harnesses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input data violates a documented invariant or precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An exact enumeration would exceed the configured work budget.
    #[error("enumeration of {required} atoms exceeds budget {budget}; {hint}")]
    BudgetExceeded {
        required: u128,
        budget: u64,
        hint: &'static str,
    },

    /// A value cannot be represented exactly in the chosen number format.
    #[error("exact representation out of range: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
