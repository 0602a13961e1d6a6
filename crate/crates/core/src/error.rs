use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument or input violates an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive routine was asked to handle more items than its cap allows.
    #[error("size error: {what} has {size} items, cap is {cap}")]
    Size {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    /// A malformed instance file.
    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
