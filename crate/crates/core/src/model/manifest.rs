//! JSON-lines dataset manifest. Relative paths resolve against the
//! manifest's own directory.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    load_roi, load_segmentation, ImagePair, Label, LookDirection, Modality, SensorGeometry, View,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub sas_image: String,
    pub sas_seg: String,
    pub opt_image: String,
    pub opt_seg: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub altitude_m: f64,
    pub range_origin_m: f64,
    pub pixel_spacing_m: f64,
    pub look_direction: LookDirection,
}

impl ManifestRecord {
    pub fn geometry(&self) -> Result<SensorGeometry> {
        SensorGeometry::new(
            self.altitude_m,
            self.range_origin_m,
            self.pixel_spacing_m,
            self.look_direction,
        )
    }

    /// Loads and validates every file the record references.
    pub fn load(&self, base: &Path, index: usize) -> Result<ImagePair> {
        let resolve = |p: &str| -> Result<PathBuf> {
            let path = base.join(p);
            if !path.exists() {
                return Err(Error::MissingFile(path));
            }
            Ok(path)
        };
        let label = self.label.as_deref().map(str::parse::<Label>).transpose()?;
        let geometry = self.geometry()?;

        let sas_image = load_roi(resolve(&self.sas_image)?, Modality::Sas)?;
        let sas_seg = load_segmentation(resolve(&self.sas_seg)?)?;
        let opt_image = load_roi(resolve(&self.opt_image)?, Modality::Optical)?;
        let opt_seg = load_segmentation(resolve(&self.opt_seg)?)?;

        let check = |what: &str, image: (usize, usize), seg: (usize, usize)| {
            if image != seg {
                return Err(Error::InconsistentDimensions {
                    record: index,
                    reason: format!("{what} image is {image:?} but its segmentation is {seg:?}"),
                });
            }
            Ok(())
        };
        check("sas", sas_image.dims(), sas_seg.dims())?;
        check("optical", opt_image.dims(), opt_seg.dims())?;

        let id = self.id.clone().unwrap_or_else(|| format!("{index:05}"));
        ImagePair::new(
            id,
            View::new(sas_image, sas_seg)?,
            View::new(opt_image, opt_seg)?,
            label,
            geometry,
        )
    }
}

/// Parses the manifest without touching the referenced files.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ManifestRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Loads every pair of a manifest, in record order.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ImagePair>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    read_records(path)?
        .iter()
        .enumerate()
        .map(|(i, r)| r.load(base, i))
        .collect()
}

pub fn write_manifest(path: impl AsRef<Path>, records: &[ManifestRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").expect("write to Vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
