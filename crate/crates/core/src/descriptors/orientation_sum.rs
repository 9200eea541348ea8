//! Orientation sum: shadow pixel counts along lines through the shadow
//! centroid, sampled every degree.

use crate::error::{Error, Result};
use crate::geometry;
use crate::model::BinaryGrid;

/// Number of profile samples (one per degree over `[0, 180)`).
pub const PROFILE_LEN: usize = 180;

/// `values[k]` is the normalized orientation sum at `k` degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationProfile {
    pub values: Vec<f64>,
}

impl OrientationProfile {
    /// Wraps already normalized values; the caller guarantees a maximum of 1.
    pub fn from_values(values: Vec<f64>) -> Self {
        assert_eq!(values.len(), PROFILE_LEN, "profile must have {PROFILE_LEN} samples");
        Self { values }
    }

    pub fn angle_deg(index: usize) -> f64 {
        index as f64
    }
}

/// Membership of a cell in the digital line of orientation `theta` through
/// `(cx, cy)`: perpendicular distance from the cell center below half a cell.
#[inline]
pub(crate) fn on_line(sin_t: f64, cos_t: f64, cx: f64, cy: f64, x: usize, y: usize) -> bool {
    // direction in pixel coordinates is (cos, -sin); the normal is (sin, cos)
    ((x as f64 - cx) * sin_t + (y as f64 - cy) * cos_t).abs() < 0.5
}

fn count_on_line(pixels: &[(usize, usize)], cx: f64, cy: f64, theta_deg: f64) -> usize {
    let (s, c) = theta_deg.to_radians().sin_cos();
    pixels
        .iter()
        .filter(|&&(x, y)| on_line(s, c, cx, cy, x, y))
        .count()
}

/// Count of shadow pixels on the line of orientation `theta_deg` through the
/// shadow centroid.
pub fn orientation_sum(shadow: &BinaryGrid, theta_deg: f64) -> Result<f64> {
    let stats = geometry::mask_stats(shadow).ok_or(Error::EmptyShadow)?;
    let pixels: Vec<_> = shadow.iter_set().collect();
    let (cx, cy) = stats.centroid;
    Ok(count_on_line(&pixels, cx, cy, theta_deg) as f64)
}

/// The orientation sum at every whole degree, normalized by its maximum.
pub fn orientation_profile(shadow: &BinaryGrid) -> Result<OrientationProfile> {
    let stats = geometry::mask_stats(shadow).ok_or(Error::EmptyShadow)?;
    let pixels: Vec<_> = shadow.iter_set().collect();
    let (cx, cy) = stats.centroid;
    let raw: Vec<f64> = (0..PROFILE_LEN)
        .map(|k| count_on_line(&pixels, cx, cy, k as f64) as f64)
        .collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::EmptyShadow);
    }
    Ok(OrientationProfile {
        values: raw.into_iter().map(|v| v / max).collect(),
    })
}

/// Angles (degrees) of the profile maximum and minimum; the smallest angle
/// wins ties.
pub fn extremal_angles(profile: &OrientationProfile) -> (f64, f64) {
    let mut imax = 0;
    let mut imin = 0;
    for (i, &v) in profile.values.iter().enumerate() {
        if v > profile.values[imax] {
            imax = i;
        }
        if v < profile.values[imin] {
            imin = i;
        }
    }
    (
        OrientationProfile::angle_deg(imax),
        OrientationProfile::angle_deg(imin),
    )
}
