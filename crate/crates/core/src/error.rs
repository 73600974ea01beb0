use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `n = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    /// An index, level or rank exceeds what the current resolution can hold.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Two operands live at different resolutions.
    #[error("level mismatch: {left} vs {right}")]
    LevelMismatch { left: u32, right: u32 },

    /// Exact arithmetic would overflow the 128-bit numerators.
    #[error("exact arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// An exact operation was requested on float data, or a value has no exact form.
    #[error("not exact: {0}")]
    NotExact(String),

    /// A greedy selector could not produce the requested number of terms.
    #[error("selection produced {achieved} term(s), {required} required")]
    Selection { achieved: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
