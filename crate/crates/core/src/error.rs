use std::path::PathBuf;

/// Errors produced by the hashing pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("incompatible codes: widths {left} and {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("normal vector is not unit length (norm {norm})")]
    NotUnitNormal { norm: f64 },

    #[error("lifted normal is parallel to the z axis and does not cross the z=1 plane")]
    ParallelToLiftAxis,

    #[error("need at least {needed} vectors, got {found}")]
    TooFewVectors { needed: usize, found: usize },

    #[error("component {index} has zero variance (use --allow-constant to keep it with unit scale)")]
    ConstantComponent { index: usize },

    #[error("data has zero total variance after normalization")]
    ZeroVariance,

    #[error("eigenvalue {index} is zero; ratio undefined")]
    ZeroEigenvalue { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("k = {k} out of range for {len} items")]
    KOutOfRange { k: usize, len: usize },

    #[error("no label pairs supplied")]
    NoPairs,

    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),

    #[error("item {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic number: not a {expected} file")]
    BadMagic { expected: &'static str },

    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

impl Error {
    pub(crate) fn at(index: usize, source: Error) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
