use thiserror::Error;

/// Errors raised by the simulator and receiver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented range or invariant.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A frame or channel layout that cannot be realized without spillover.
    #[error("invalid configuration: {0}")]
    Configuration(String),
    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
