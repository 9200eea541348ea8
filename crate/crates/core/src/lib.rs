//! Paired optical/SAS underwater object classification.
//!
//! The pipeline takes a SAS region of interest and an optical region of interest
//! (each with a ternary background/highlight/shadow segmentation), converts the
//! optical object into a synthetic SAS highlight/shadow representation, extracts
//! shadow/highlight geometric descriptors from both, weights them by image quality
//! and decides among Manta, Cylinder, Natural and Unknown with a quadratic
//! discriminant classifier.
//!
//! Module map:
//! - [`model`]: domain types, graymap and manifest I/O
//! - [`geometry`]: region moments and principal-axis orientation
//! - [`optic2sas`]: height recovery, alignment, hidden point removal, shadow rendering
//! - [`descriptors`]: orientation sum, wavelet skewness, HSO, highlight curvature
//! - [`fusion`]: quality index, transfer functions, feature merging, QDA
//! - [`harness`]: synthetic scenes, Monte-Carlo evaluation, end-to-end pipeline

pub mod descriptors;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod harness;
pub mod model;
pub mod optic2sas;

pub use error::{Error, Result};
pub use model::{
    BinaryGrid, ImagePair, Label, LookDirection, Modality, PixelClass, PointCloud, Region,
    RoiImage, SegmentationMap, SensorGeometry,
};
