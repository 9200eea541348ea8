//! Writers for benchmark directories, feature tables and reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::pipeline::PairFeatures;
use crate::descriptors::FeatureVector;
use crate::error::{Error, Result};
use crate::model::{save_roi, save_segmentation, write_manifest, BitDepth, ImagePair, ManifestRecord};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidSpec(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(bytes).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Saves every pair as four PGM files plus a manifest; returns the manifest
/// path.
pub fn write_benchmark(pairs: &[ImagePair], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut records = Vec::with_capacity(pairs.len());
    for p in pairs {
        let name = |suffix: &str| format!("{}_{suffix}.pgm", p.id);
        let rec = ManifestRecord {
            id: Some(p.id.clone()),
            sas_image: name("sas"),
            sas_seg: name("sas_seg"),
            opt_image: name("opt"),
            opt_seg: name("opt_seg"),
            label: p.ground_truth.map(|l| l.to_string()),
            altitude_m: p.geometry.altitude_m,
            range_origin_m: p.geometry.range_origin_m,
            pixel_spacing_m: p.geometry.pixel_spacing_m,
            look_direction: p.geometry.look_direction,
        };
        save_roi(dir.join(&rec.sas_image), &p.sas.image, BitDepth::Sixteen)?;
        save_segmentation(dir.join(&rec.sas_seg), &p.sas.segmentation)?;
        save_roi(dir.join(&rec.opt_image), &p.optical.image, BitDepth::Sixteen)?;
        save_segmentation(dir.join(&rec.opt_seg), &p.optical.segmentation)?;
        records.push(rec);
    }
    let manifest = dir.join(MANIFEST_NAME);
    let tmp = dir.join(format!(".{MANIFEST_NAME}.tmp"));
    write_manifest(&tmp, &records)?;
    fs::rename(&tmp, &manifest).map_err(|e| Error::io(&manifest, e))?;
    Ok(manifest)
}

pub const FEATURE_COLUMNS: [&str; 13] = [
    "id",
    "modality",
    "theta_max",
    "theta_min",
    "skew_scale",
    "skew_translation",
    "hso",
    "hc0",
    "hc1",
    "hc2",
    "hc3",
    "shadow_missing",
    "psi",
];

fn feature_row(id: &str, modality: &str, f: &FeatureVector, psi: f64) -> Vec<String> {
    let mut row = vec![id.to_string(), modality.to_string()];
    row.extend(f.to_array().iter().map(|v| v.to_string()));
    row.push(f.shadow_missing.to_string());
    row.push(psi.to_string());
    row
}

/// Two rows per pair (SAS, then optical).
pub fn features_csv(features: &[PairFeatures]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidSpec(format!("csv: {e}"));
    w.write_record(FEATURE_COLUMNS).map_err(csv_err)?;
    for f in features {
        w.write_record(feature_row(&f.id, "sas", &f.sas, f.psi_sas)).map_err(csv_err)?;
        w.write_record(feature_row(&f.id, "optical", &f.opt, f.psi_opt)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidSpec(format!("csv: {e}")))
}

pub fn write_features_csv(path: &Path, features: &[PairFeatures]) -> Result<()> {
    write_atomic(path, &features_csv(features)?)
}
