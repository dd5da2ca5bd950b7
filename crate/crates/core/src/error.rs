use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {}: {reason}", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },
    #[error("corrupt image data: {}: {reason}", path.display())]
    CorruptData { path: PathBuf, reason: String },
    #[error("expected {expected} channel(s), got {actual}")]
    ChannelCount { expected: usize, actual: usize },
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("invalid threshold grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("dimension mismatch: expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    ClassTooSmall {
        class: usize,
        count: usize,
        folds: usize,
    },
    #[error("grade {grade} out of range [0,4] for sample {id}")]
    GradeOutOfRange { id: String, grade: i64 },
    #[error("no image found for sample {id} in {}", dir.display())]
    MissingImage { id: String, dir: PathBuf },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("feature file error: {0}")]
    FeatureFile(String),
    #[error("incompatible feature file {}: fingerprint {found} does not match {expected}", path.display())]
    IncompatibleFeatureFile {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("unknown model: {0}")]
    UnknownModel(String),
    #[error("model format error: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
