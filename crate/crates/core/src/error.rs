use thiserror::Error;

/// Errors raised by the simulator and the analysis toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Caller supplied arguments outside an operation's domain.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// A randomized generator exhausted its retry budget.
    #[error("generation failed: {0}")]
    Generation(String),
    /// An operation was used in the wrong fidelity mode.
    #[error("mode error: {0}")]
    Mode(String),
    /// A protocol configuration is incomplete or infeasible.
    #[error("configuration error: {0}")]
    Config(String),
    /// An invariant that construction should guarantee did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
