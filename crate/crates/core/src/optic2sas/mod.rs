//! Optical-to-SAS conversion.
//!
//! The optical highlight is lifted to a 3D point cloud by a height-recovery
//! step, rotated so its highlight orientation matches the SAS highlight,
//! moved onto the SAS object center, and rendered into binary highlight and
//! shadow maps from the sonar's point of view.

mod hpr;
mod hull;
mod render;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, RegionStats};
use crate::model::{ImagePair, Modality, PointCloud, Region, RoiImage, SegmentationMap};

pub use hpr::{hpr_visible, hpr_visible_indices, HPR_GAMMA};
pub use render::{render_sas_maps, SyntheticSasMaps};

/// Recovers object height from a single optical image.
pub trait HeightRecovery {
    /// Returns one point per highlight pixel, `(x, y)` centered on the
    /// highlight centroid and `z` in meters.
    fn recover(&self, roi: &RoiImage, seg: &SegmentationMap) -> Result<PointCloud>;
}

/// Monotone intensity-to-height mapping under an overhead Lambertian light:
/// the brightest highlight pixel is the highest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambertianHeight {
    pub height_scale_m: f64,
}

impl HeightRecovery for LambertianHeight {
    fn recover(&self, roi: &RoiImage, seg: &SegmentationMap) -> Result<PointCloud> {
        shape_from_shading(roi, seg, self.height_scale_m)
    }
}

pub fn shape_from_shading(
    roi: &RoiImage,
    seg: &SegmentationMap,
    height_scale_m: f64,
) -> Result<PointCloud> {
    if roi.modality() != Modality::Optical {
        return Err(Error::WrongModality {
            expected: Modality::Optical,
            found: roi.modality(),
        });
    }
    seg.ensure_matches(roi)?;
    let highlight = seg.highlight();
    let stats = geometry::mask_stats(&highlight).ok_or(Error::EmptyHighlight)?;
    let (cx, cy) = stats.centroid;

    let (lo, hi) = highlight
        .iter_set()
        .map(|(x, y)| roi.get(x, y))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;

    let points = highlight
        .iter_set()
        .map(|(x, y)| {
            let z = if span > 0.0 {
                height_scale_m * (roi.get(x, y) - lo) / span
            } else {
                0.5 * height_scale_m
            };
            Vector3::new(x as f64 - cx, y as f64 - cy, z)
        })
        .collect();
    Ok(PointCloud::new(points))
}

/// Rotation that brings the optical highlight onto the SAS highlight
/// orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentParams {
    pub theta_sas_deg: f64,
    pub theta_opt_deg: f64,
    /// `theta_sas - theta_opt` folded to `(-90, 90]`; zero when either
    /// highlight is isotropic.
    pub delta_deg: f64,
}

/// Folds an axial angle difference into `(-90, 90]`.
pub fn fold_delta(delta_deg: f64) -> f64 {
    let d = geometry::fold_axial(delta_deg);
    if d > 90.0 {
        d - 180.0
    } else {
        d
    }
}

pub fn compute_alignment(sas_seg: &SegmentationMap, opt_seg: &SegmentationMap) -> Result<AlignmentParams> {
    let sas = geometry::mask_orientation(&sas_seg.highlight()).ok_or(Error::EmptyHighlight)?;
    let opt = geometry::mask_orientation(&opt_seg.highlight()).ok_or(Error::EmptyHighlight)?;
    let delta_deg = if sas.isotropic || opt.isotropic {
        0.0
    } else {
        fold_delta(sas.angle_deg - opt.angle_deg)
    };
    Ok(AlignmentParams {
        theta_sas_deg: sas.angle_deg,
        theta_opt_deg: opt.angle_deg,
        delta_deg,
    })
}

/// Rotates every point about the z-axis by `delta_deg` (counter-clockwise in
/// the y-up frame).
pub fn align_cloud(cloud: &PointCloud, params: &AlignmentParams) -> PointCloud {
    let (s, c) = params.delta_deg.to_radians().sin_cos();
    PointCloud::new(
        cloud
            .points
            .iter()
            .map(|p| Vector3::new(p.x * c + p.y * s, -p.x * s + p.y * c, p.z))
            .collect(),
    )
}

/// Translates the cloud by the SAS highlight centroid.
pub fn position_cloud(cloud: &PointCloud, sas_highlight: &RegionStats) -> PointCloud {
    let u = Vector3::new(sas_highlight.centroid.0, sas_highlight.centroid.1, 0.0);
    PointCloud::new(cloud.points.iter().map(|p| p + u).collect())
}

/// Full optical-to-SAS chain for one pair, rendering into the SAS ROI grid.
pub fn optic_to_sas(
    pair: &ImagePair,
    recovery: &dyn HeightRecovery,
) -> Result<SyntheticSasMaps> {
    let cloud = recovery.recover(&pair.optical.image, &pair.optical.segmentation)?;
    let params = compute_alignment(&pair.sas.segmentation, &pair.optical.segmentation)?;
    let sas_stats = geometry::region_stats(&pair.sas.segmentation, Region::Highlight)
        .map_err(|_| Error::EmptyHighlight)?;
    let placed = position_cloud(&align_cloud(&cloud, &params), &sas_stats);
    render_sas_maps(&placed, &pair.geometry, pair.sas.image.dims())
}
