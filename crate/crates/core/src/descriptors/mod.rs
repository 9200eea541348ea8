//! Shadow/highlight descriptors and the fixed-length feature vector.
//!
//! Layout of [`FeatureVector::to_array`] (length [`FEATURE_LEN`]):
//! `[theta_max, theta_min, skew_scale, skew_translation, hso, hc0, hc1, hc2, hc3]`.

mod curvature;
mod orientation_sum;
mod wavelet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, axial_distance, Orientation};
use crate::model::BinaryGrid;

pub use curvature::{highlight_curvature, left_boundary, HC_ORDER};
pub use orientation_sum::{
    extremal_angles, orientation_profile, orientation_sum, OrientationProfile, PROFILE_LEN,
};
pub use wavelet::{morlet, wavelet_features, MorletParams, WaveletFeatures, SCALE_COUNT};

pub const FEATURE_LEN: usize = 9;

/// Indices of the angular components (degrees, axial).
pub const THETA_MAX: usize = 0;
pub const THETA_MIN: usize = 1;
pub const HSO: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub theta_max_deg: f64,
    pub theta_min_deg: f64,
    pub skew_scale: f64,
    pub skew_translation: f64,
    pub hso_deg: f64,
    pub hc: [f64; 4],
    /// Set when the shadow was empty and the shadow entries carry the fill
    /// convention (angles 0, skews 0, HSO 90).
    pub shadow_missing: bool,
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_LEN] {
        [
            self.theta_max_deg,
            self.theta_min_deg,
            self.skew_scale,
            self.skew_translation,
            self.hso_deg,
            self.hc[0],
            self.hc[1],
            self.hc[2],
            self.hc[3],
        ]
    }

    pub fn from_array(v: &[f64; FEATURE_LEN], shadow_missing: bool) -> Self {
        Self {
            theta_max_deg: v[0],
            theta_min_deg: v[1],
            skew_scale: v[2],
            skew_translation: v[3],
            hso_deg: v[4],
            hc: [v[5], v[6], v[7], v[8]],
            shadow_missing,
        }
    }
}

/// Highlight-shadow orientation: the axial angle between the two principal
/// axes, in `[0, 90]`. Isotropic regions have no axis and yield 90.
pub fn hso(shadow: &Orientation, highlight: &Orientation) -> f64 {
    if shadow.isotropic || highlight.isotropic {
        return 90.0;
    }
    axial_distance(shadow.angle_deg, highlight.angle_deg)
}

/// HSO computed straight from the two binary regions.
pub fn hso_of_maps(shadow: &BinaryGrid, highlight: &BinaryGrid) -> Result<f64> {
    let s = geometry::mask_orientation(shadow).ok_or(Error::EmptyShadow)?;
    let h = geometry::mask_orientation(highlight).ok_or(Error::EmptyHighlight)?;
    Ok(hso(&s, &h))
}

/// Assembles the feature vector from a highlight/shadow pair.
pub fn extract_features(
    highlight: &BinaryGrid,
    shadow: &BinaryGrid,
    params: &MorletParams,
) -> Result<FeatureVector> {
    let h_orient = geometry::mask_orientation(highlight).ok_or(Error::EmptyHighlight)?;
    let hc = highlight_curvature(highlight, HC_ORDER)?;
    let hc = [hc[0], hc[1], hc[2], hc[3]];

    let Some(s_orient) = geometry::mask_orientation(shadow) else {
        return Ok(FeatureVector {
            theta_max_deg: 0.0,
            theta_min_deg: 0.0,
            skew_scale: 0.0,
            skew_translation: 0.0,
            hso_deg: 90.0,
            hc,
            shadow_missing: true,
        });
    };

    let profile = orientation_profile(shadow)?;
    let (theta_max_deg, theta_min_deg) = extremal_angles(&profile);
    let wf = wavelet_features(&profile, params);
    Ok(FeatureVector {
        theta_max_deg,
        theta_min_deg,
        skew_scale: wf.skew_scale,
        skew_translation: wf.skew_translation,
        hso_deg: hso(&s_orient, &h_orient),
        hc,
        shadow_missing: false,
    })
}
