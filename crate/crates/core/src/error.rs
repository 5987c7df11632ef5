use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core and the text/model pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("index {index} out of range for {what} of size {size}")]
    Index {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("parameter `{0}` has no gradient")]
    MissingGradient(String),
    #[error("unknown parameter `{0}`")]
    UnknownParam(String),
    #[error("non-finite loss at batch {batch} (epoch {epoch})")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("checkpoint hook failed: {0}")]
    Hook(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
