//! Error type shared by every stage of the codec.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by transforms, quantization, entropy coding, the
/// container layer, and media I/O.
#[derive(Debug)]
pub enum Error {
    /// An input's size does not match what the operation requires.
    DimensionMismatch { expected: usize, got: usize },
    /// An argument is invalid for a reason other than a size mismatch.
    InvalidArgument(String),
    /// The operation is only implemented for a specific block size.
    UnsupportedSize(usize),
    /// A coefficient magnitude exceeds what the entropy tables can represent.
    OutOfRange(String),
    /// The compressed stream contains data that cannot be decoded.
    CorruptStream(String),
    /// The compressed stream ended in the middle of a decode unit.
    TruncatedStream(String),
    /// The media file is not in a format this crate reads.
    UnsupportedFormat(String),
    /// The media file ended before all declared data was present.
    TruncatedInput(String),
    /// A sample value exceeds the declared bit depth.
    DataRange(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UnsupportedSize(n) => write!(f, "unsupported block size {n}"),
            Error::OutOfRange(msg) => write!(f, "value out of range: {msg}"),
            Error::CorruptStream(msg) => write!(f, "corrupt stream: {msg}"),
            Error::TruncatedStream(msg) => write!(f, "truncated stream: {msg}"),
            Error::UnsupportedFormat(msg) => write!(f, "unsupported format: {msg}"),
            Error::TruncatedInput(msg) => write!(f, "truncated input: {msg}"),
            Error::DataRange(msg) => write!(f, "sample out of range: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}
