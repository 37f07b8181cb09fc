use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dims {0:?}: need 2 or 3 axes, each with at least 2 vertices")]
    InvalidDims(Vec<usize>),

    #[error("vertex index {index} out of range for {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("field has {actual} values, topology expects {expected}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("non-finite value {value} at vertex {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("relative error bound on a constant field (zero value range)")]
    ZeroRange,

    #[error("invalid error bound {0}: must be finite and > 0")]
    InvalidBound(f64),

    #[error("{count} vertices violate the error bound {bound} (worst deviation {worst})")]
    BoundViolation {
        count: usize,
        bound: f64,
        worst: f64,
    },

    #[error("topology mismatch between fields or label sets")]
    TopologyMismatch,

    #[error("dtype mismatch: expected {expected}, found {found}")]
    DtypeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("edit derivation did not converge: {0}")]
    NonConvergence(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("corrupt payload: {0}")]
    Corrupt(String),

    #[error("unsupported codec id {0}")]
    UnsupportedCodec(u8),

    #[error("bad archive magic")]
    BadMagic,

    #[error("archive version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u8, found: u8 },

    #[error("edit indices must be strictly increasing (at position {0})")]
    UnsortedIndices(usize),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn corrupt(msg: impl Into<String>) -> Self {
        Error::Corrupt(msg.into())
    }
}
