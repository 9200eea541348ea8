use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },
    #[error("image is {width}x{height}, both axes must be at least 8 pixels")]
    DimensionTooSmall { width: usize, height: usize },
    #[error("illegal segmentation value {value} at ({x}, {y}); expected 0, 128 or 255")]
    IllegalLabelValue { value: u16, x: usize, y: usize },
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("inconsistent dimensions in manifest record {record}: {reason}")]
    InconsistentDimensions { record: usize, reason: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("invalid intensity {value} at index {index}; intensities must be finite and in [0, 1]")]
    InvalidIntensity { index: usize, value: f64 },
    #[error("invalid sensor geometry: {0}")]
    InvalidGeometry(String),
    #[error("expected a {expected:?} image, found {found:?}")]
    WrongModality {
        expected: crate::model::Modality,
        found: crate::model::Modality,
    },
    #[error("region {0:?} is empty")]
    EmptyRegion(crate::model::Region),
    #[error("highlight region is empty")]
    EmptyHighlight,
    #[error("shadow region is empty")]
    EmptyShadow,
    #[error("polynomial fit of order {order} needs at least {needed} distinct rows, found {found}")]
    RankDeficientFit {
        order: usize,
        needed: usize,
        found: usize,
    },
    #[error("object point at height {height_m} m is not below the sensor altitude {altitude_m} m")]
    ObjectAboveSensor { height_m: f64, altitude_m: f64 },
    #[error("region {region:?} has {found} pixels, at least {needed} required")]
    RegionTooSmall {
        region: crate::model::Region,
        found: usize,
        needed: usize,
    },
    #[error("fusion weights sum to zero")]
    ZeroWeights,
    #[error("class {0} has no training samples")]
    MissingClass(crate::model::Label),
    #[error("merged covariance of class {0} is not positive definite")]
    SingularCovariance(crate::model::Label),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("could not draw a split with every class in the training fold after {0} attempts")]
    DegenerateSplit(usize),
    #[error("unsupported model format version {0}")]
    UnsupportedVersion(u32),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedFile { .. } => "MalformedFile",
            Error::DimensionTooSmall { .. } => "DimensionTooSmall",
            Error::IllegalLabelValue { .. } => "IllegalLabelValue",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::MissingFile(_) => "MissingFile",
            Error::InconsistentDimensions { .. } => "InconsistentDimensions",
            Error::UnknownLabel(_) => "UnknownLabel",
            Error::InvalidIntensity { .. } => "InvalidIntensity",
            Error::InvalidGeometry(_) => "InvalidGeometry",
            Error::WrongModality { .. } => "WrongModality",
            Error::EmptyRegion(_) => "EmptyRegion",
            Error::EmptyHighlight => "EmptyHighlight",
            Error::EmptyShadow => "EmptyShadow",
            Error::RankDeficientFit { .. } => "RankDeficientFit",
            Error::ObjectAboveSensor { .. } => "ObjectAboveSensor",
            Error::RegionTooSmall { .. } => "RegionTooSmall",
            Error::ZeroWeights => "ZeroWeights",
            Error::MissingClass(_) => "MissingClass",
            Error::SingularCovariance(_) => "SingularCovariance",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::DegenerateSplit(_) => "DegenerateSplit",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::Io { .. } => "Io",
            Error::Json(_) => "Json",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            return Error::MissingFile(path.into());
        }
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
