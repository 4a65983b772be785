use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{width}x{height} cannot be split evenly into a {target_w}x{target_h} grid")]
    NonDivisibleDimensions {
        width: usize,
        height: usize,
        target_w: usize,
        target_h: usize,
    },

    #[error("cannot upsample {src_w}x{src_h} to the smaller size {dst_w}x{dst_h}")]
    DownscaleNotSupported {
        src_w: usize,
        src_h: usize,
        dst_w: usize,
        dst_h: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("incompatible dimensions: {0}")]
    IncompatibleDimensions(String),

    #[error("malformed pyramid: {0}")]
    MalformedPyramid(String),

    #[error("invalid buffer: {0}")]
    InvalidBuffer(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("alpha {0} is outside [0, 1]")]
    AlphaOutOfRange(f32),

    #[error("bad mock field spec: {0}")]
    BadSpec(String),

    #[error("{path}: expected magic {expected:?}")]
    BadMagic { path: PathBuf, expected: &'static str },

    #[error("{path}: file is truncated (expected {expected} bytes, found {found})")]
    TruncatedFile {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}: unsupported format ({reason})")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("need at least two frames, got {0}")]
    TooFewFrames(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}
