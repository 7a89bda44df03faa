use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("expected {expected} channel(s), got {actual}")]
    WrongChannelCount { expected: usize, actual: usize },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{width}x{height} image is not divisible by a {rows}x{cols} grid")]
    IndivisibleDimensions {
        width: usize,
        height: usize,
        rows: usize,
        cols: usize,
    },
    #[error("expected {expected} patches, got {actual}")]
    PatchCountMismatch { expected: usize, actual: usize },
    #[error("restore callback changed the image shape: {0}")]
    CallbackShapeMismatch(String),
    #[error("invalid resample spec: {0}")]
    InvalidSpec(String),
    #[error("sequence length {actual} does not match expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("window partition metadata mismatch: {0}")]
    PartitionMetadataMismatch(String),
    #[error("cutoff {k} out of range (max index {max})")]
    CutoffOutOfRange { k: usize, max: usize },
    #[error("invalid cutoff list: {0}")]
    InvalidCutoffs(String),
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },
    #[error("empty input")]
    EmptyInput,
    #[error("odd channel count {0}")]
    OddChannelCount(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("weight shape mismatch: {0}")]
    WeightShapeMismatch(String),
    #[error("non-finite input {0}")]
    NonFiniteInput(f64),
    #[error("incompatible stack: {0}")]
    IncompatibleStack(String),
    #[error("codec error: {0}")]
    Codec(String),
    #[error("insufficient images: need {needed}, have {available}")]
    InsufficientImages { needed: usize, available: usize },
    #[error("benchmark spec lists no degradations")]
    InsufficientSpecs,
    #[error("invalid degradation spec: {0}")]
    InvalidDegradation(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed spectrum file: {0}")]
    MalformedSpectrum(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
