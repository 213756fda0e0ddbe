use thiserror::Error;

/// Errors raised by the group, walk and cutoff computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {what} needs {needed} elements, cap is {cap}")]
    CapacityExceeded {
        what: String,
        needed: u128,
        cap: usize,
    },

    #[error("generator set does not generate the group: {0}")]
    NotGenerating(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("scan cap of {cap} exceeded while searching for {what}")]
    CapExceeded { what: String, cap: u64 },

    #[error("no index: prefix mass never exceeds c = {c} (total mass {total})")]
    NoIndex { c: f64, total: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
