//! Domain types shared by every stage of the pipeline, plus graymap and
//! manifest I/O.

mod manifest;
mod pgm;

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use manifest::{load_manifest, read_records, write_manifest, ManifestRecord};
pub use pgm::{load_roi, load_segmentation, save_roi, save_segmentation, BitDepth};

/// Smallest accepted ROI edge, in pixels.
pub const MIN_DIMENSION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modality {
    Optical,
    Sas,
}

/// Single-channel intensity grid in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiImage {
    width: usize,
    height: usize,
    intensities: Vec<f64>,
    modality: Modality,
}

impl RoiImage {
    pub fn new(
        width: usize,
        height: usize,
        intensities: Vec<f64>,
        modality: Modality,
    ) -> Result<Self> {
        if width < MIN_DIMENSION || height < MIN_DIMENSION {
            return Err(Error::DimensionTooSmall { width, height });
        }
        if intensities.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (intensities.len(), 1),
            });
        }
        if let Some((index, &value)) = intensities
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidIntensity { index, value });
        }
        Ok(Self {
            width,
            height,
            intensities,
            modality,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn modality(&self) -> Modality {
        self.modality
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.intensities[y * self.width + x]
    }
}

/// Label of a single segmentation pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PixelClass {
    #[default]
    Background,
    Highlight,
    Shadow,
}

/// The two labelled regions features are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Background,
    Highlight,
    Shadow,
}

impl Region {
    fn class(self) -> PixelClass {
        match self {
            Region::Background => PixelClass::Background,
            Region::Highlight => PixelClass::Highlight,
            Region::Shadow => PixelClass::Shadow,
        }
    }
}

/// Ternary per-pixel segmentation. Highlight and shadow can never overlap
/// because each pixel carries exactly one label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationMap {
    width: usize,
    height: usize,
    labels: Vec<PixelClass>,
}

impl SegmentationMap {
    pub fn new(width: usize, height: usize, labels: Vec<PixelClass>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (labels.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Builds a map from binary highlight and shadow planes. Cells set in both
    /// planes are labelled highlight.
    pub fn from_masks(highlight: &BinaryGrid, shadow: &BinaryGrid) -> Result<Self> {
        if highlight.dims() != shadow.dims() {
            return Err(Error::DimensionMismatch {
                expected: highlight.dims(),
                found: shadow.dims(),
            });
        }
        let labels = highlight
            .cells()
            .iter()
            .zip(shadow.cells())
            .map(|(&h, &s)| match (h, s) {
                (true, _) => PixelClass::Highlight,
                (false, true) => PixelClass::Shadow,
                _ => PixelClass::Background,
            })
            .collect();
        Self::new(highlight.width(), highlight.height(), labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[PixelClass] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> PixelClass {
        self.labels[y * self.width + x]
    }

    pub fn count(&self, region: Region) -> usize {
        let class = region.class();
        self.labels.iter().filter(|&&l| l == class).count()
    }

    pub fn mask(&self, region: Region) -> BinaryGrid {
        let class = region.class();
        BinaryGrid {
            width: self.width,
            height: self.height,
            cells: self.labels.iter().map(|&l| l == class).collect(),
        }
    }

    /// The highlight plane `I_h`.
    pub fn highlight(&self) -> BinaryGrid {
        self.mask(Region::Highlight)
    }

    /// The shadow plane `I_s`.
    pub fn shadow(&self) -> BinaryGrid {
        self.mask(Region::Shadow)
    }

    pub fn ensure_matches(&self, roi: &RoiImage) -> Result<()> {
        if self.dims() != roi.dims() {
            return Err(Error::DimensionMismatch {
                expected: roi.dims(),
                found: self.dims(),
            });
        }
        Ok(())
    }
}

/// Row-major binary raster.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (cells.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                cells.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            cells,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.cells[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    /// Coordinates `(x, y)` of set cells in row-major order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let width = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(move |(i, _)| (i % width, i / width))
    }

    pub fn intersects(&self, other: &BinaryGrid) -> bool {
        self.cells.iter().zip(&other.cells).any(|(&a, &b)| a && b)
    }
}

/// Cloud of 3D points. `x` and `y` are pixel-grid coordinates (`y` grows
/// downward); `z` is height above the seabed in meters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Vector3<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Mean of the `(x, y)` coordinates.
    pub fn planar_centroid(&self) -> Option<(f64, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let n = self.points.len() as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Some((sx / n, sy / n))
    }
}

/// Classifier output labels. `U` covers both "not a target type" and
/// "SAS and optical objects disagree".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    M,
    C,
    N,
    U,
}

impl Label {
    /// All labels in tie-break order.
    pub const ALL: [Label; 4] = [Label::M, Label::C, Label::N, Label::U];

    pub fn index(self) -> usize {
        match self {
            Label::M => 0,
            Label::C => 1,
            Label::N => 2,
            Label::U => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Self::ALL.get(i).copied()
    }

    /// Ground truth of a pair given the object type seen by each sensor.
    /// Matching target types keep their label, anything else is `U`.
    pub fn for_pair(sas: Label, optical: Label) -> Label {
        if sas == optical && sas != Label::U {
            sas
        } else {
            Label::U
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::M => "M",
            Label::C => "C",
            Label::N => "N",
            Label::U => "U",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" => Ok(Label::M),
            "C" => Ok(Label::C),
            "N" => Ok(Label::N),
            "U" => Ok(Label::U),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LookDirection {
    Left,
    Right,
}

/// Per-acquisition sonar geometry.
///
/// With `Right` look the sensor sits to the left of the image and ground
/// range grows with the column index; `Left` mirrors this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub altitude_m: f64,
    pub range_origin_m: f64,
    pub pixel_spacing_m: f64,
    pub look_direction: LookDirection,
}

impl SensorGeometry {
    pub fn new(
        altitude_m: f64,
        range_origin_m: f64,
        pixel_spacing_m: f64,
        look_direction: LookDirection,
    ) -> Result<Self> {
        let geom = Self {
            altitude_m,
            range_origin_m,
            pixel_spacing_m,
            look_direction,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude_m.is_finite() && self.altitude_m > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "altitude must be positive, got {}",
                self.altitude_m
            )));
        }
        if !(self.pixel_spacing_m.is_finite() && self.pixel_spacing_m > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "pixel spacing must be positive, got {}",
                self.pixel_spacing_m
            )));
        }
        if !self.range_origin_m.is_finite() {
            return Err(Error::InvalidGeometry("range origin must be finite".into()));
        }
        Ok(())
    }

    /// Ground range in meters of a (possibly fractional) column.
    pub fn ground_range(&self, x: f64, width: usize) -> f64 {
        match self.look_direction {
            LookDirection::Right => self.range_origin_m + x * self.pixel_spacing_m,
            LookDirection::Left => {
                self.range_origin_m + ((width as f64 - 1.0) - x) * self.pixel_spacing_m
            }
        }
    }

    /// Column of the sensor track (ground range zero) in the image frame.
    pub fn sensor_column(&self, width: usize) -> f64 {
        let offset = self.range_origin_m / self.pixel_spacing_m;
        match self.look_direction {
            LookDirection::Right => -offset,
            LookDirection::Left => (width as f64 - 1.0) + offset,
        }
    }
}

/// One sensor's view of the object.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub image: RoiImage,
    pub segmentation: SegmentationMap,
}

impl View {
    pub fn new(image: RoiImage, segmentation: SegmentationMap) -> Result<Self> {
        segmentation.ensure_matches(&image)?;
        Ok(Self {
            image,
            segmentation,
        })
    }
}

/// A SAS view and an optical view of (supposedly) the same object.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePair {
    pub id: String,
    pub sas: View,
    pub optical: View,
    pub ground_truth: Option<Label>,
    pub geometry: SensorGeometry,
}

impl ImagePair {
    pub fn new(
        id: impl Into<String>,
        sas: View,
        optical: View,
        ground_truth: Option<Label>,
        geometry: SensorGeometry,
    ) -> Result<Self> {
        if sas.image.modality() != Modality::Sas {
            return Err(Error::WrongModality {
                expected: Modality::Sas,
                found: sas.image.modality(),
            });
        }
        if optical.image.modality() != Modality::Optical {
            return Err(Error::WrongModality {
                expected: Modality::Optical,
                found: optical.image.modality(),
            });
        }
        geometry.validate()?;
        Ok(Self {
            id: id.into(),
            sas,
            optical,
            ground_truth,
            geometry,
        })
    }
}
