//! Second-moment statistics and principal-axis orientation of pixel regions.
//!
//! Angles follow the mathematical convention: the image x-axis is the abscissa
//! and the y-axis is negated (pixel rows grow downward, angles grow
//! counter-clockwise on screen). Orientations are axial and live in `[0, 180)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinaryGrid, Region, SegmentationMap};

/// Relative eigenvalue gap below which a region counts as isotropic.
pub const ISOTROPY_THRESHOLD: f64 = 0.02;
const EIGEN_FLOOR: f64 = 1e-12;

/// Centroid and population covariance of a pixel set.
///
/// `covariance` is in pixel coordinates (y down): `[[cxx, cxy], [cxy, cyy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionStats {
    pub centroid: (f64, f64),
    pub covariance: [[f64; 2]; 2],
    pub pixel_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub angle_deg: f64,
    pub major_eigenvalue: f64,
    pub minor_eigenvalue: f64,
    pub isotropic: bool,
    /// Unit major eigenvector in the mathematical (y-up) frame.
    pub major_axis: (f64, f64),
}

/// Statistics of the `Highlight` or `Shadow` region of a segmentation map.
pub fn region_stats(seg: &SegmentationMap, region: Region) -> Result<RegionStats> {
    stats_of_pixels(seg.mask(region).iter_set()).ok_or(Error::EmptyRegion(region))
}

/// Statistics of the set cells of a binary grid, `None` when the grid is empty.
pub fn mask_stats(mask: &BinaryGrid) -> Option<RegionStats> {
    stats_of_pixels(mask.iter_set())
}

/// Moments accumulated in exact integer arithmetic, so that the result is
/// bit-identical under integer translations of the pixel set.
pub fn stats_of_pixels(pixels: impl IntoIterator<Item = (usize, usize)>) -> Option<RegionStats> {
    let (mut n, mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0i128, 0i128, 0i128, 0i128, 0i128, 0i128);
    for (x, y) in pixels {
        let (x, y) = (x as i128, y as i128);
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    if n == 0 {
        return None;
    }
    // n^2 * cov = n * sum(xy) - sum(x) * sum(y), exactly
    let n2 = (n * n) as f64;
    let cxx = (n * sxx - sx * sx) as f64 / n2;
    let cxy = (n * sxy - sx * sy) as f64 / n2;
    let cyy = (n * syy - sy * sy) as f64 / n2;
    Some(RegionStats {
        centroid: (sx as f64 / n as f64, sy as f64 / n as f64),
        covariance: [[cxx, cxy], [cxy, cyy]],
        pixel_count: n as usize,
    })
}

/// Principal-axis orientation via the closed-form eigen-decomposition of the
/// 2x2 covariance.
pub fn orientation_of(stats: &RegionStats) -> Orientation {
    // switch to the y-up frame: the off-diagonal term changes sign
    let a = stats.covariance[0][0];
    let b = -stats.covariance[0][1];
    let c = stats.covariance[1][1];

    let half_trace = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let major = (half_trace + radius).max(0.0);
    let minor = (half_trace - radius).max(0.0);

    let isotropic = (major - minor) / major.max(EIGEN_FLOOR) < ISOTROPY_THRESHOLD;
    if isotropic {
        return Orientation {
            angle_deg: 0.0,
            major_eigenvalue: major,
            minor_eigenvalue: minor,
            isotropic,
            major_axis: (1.0, 0.0),
        };
    }

    // two candidate eigenvectors for `major`; take the better conditioned one
    let v1 = (b, major - a);
    let v2 = (major - c, b);
    let (vx, vy) = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    let norm = vx.hypot(vy);
    let (vx, vy) = (vx / norm, vy / norm);

    Orientation {
        angle_deg: fold_axial(vy.atan2(vx).to_degrees()),
        major_eigenvalue: major,
        minor_eigenvalue: minor,
        isotropic,
        major_axis: (vx, vy),
    }
}

/// Orientation of a binary region, `None` when empty.
pub fn mask_orientation(mask: &BinaryGrid) -> Option<Orientation> {
    mask_stats(mask).map(|s| orientation_of(&s))
}

/// Wraps an axial angle into `[0, 180)`.
pub fn fold_axial(angle_deg: f64) -> f64 {
    let a = angle_deg.rem_euclid(180.0);
    if a >= 180.0 {
        0.0
    } else {
        a
    }
}

/// Smallest absolute difference between two axial angles, in `[0, 90]`.
pub fn axial_distance(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).abs().rem_euclid(180.0);
    if d > 90.0 {
        180.0 - d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PixelClass;
    use proptest::prelude::*;

    fn grid_from(w: usize, h: usize, pixels: &[(usize, usize)]) -> BinaryGrid {
        let mut g = BinaryGrid::new(w, h);
        for &(x, y) in pixels {
            g.set(x, y, true);
        }
        g
    }

    /// Rasterizes a `len x thick` bar centered at `(cx, cy)` and rotated by
    /// `deg` (counter-clockwise on screen).
    fn rotated_bar(w: usize, h: usize, len: f64, thick: f64, deg: f64) -> BinaryGrid {
        let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
        let (s, c) = deg.to_radians().sin_cos();
        BinaryGrid::from_fn(w, h, |x, y| {
            let dx = x as f64 - cx;
            let dy = -(y as f64 - cy);
            let u = dx * c + dy * s;
            let v = -dx * s + dy * c;
            u.abs() <= len / 2.0 && v.abs() <= thick / 2.0
        })
    }

    /// Independent oracle: integer mean/outer-product loop scaled by `n`,
    /// sum_p (n p - S)(n p - S)^T / n^3.
    fn oracle(mask: &BinaryGrid) -> ([f64; 2], [[f64; 2]; 2]) {
        let pts: Vec<(i128, i128)> = mask.iter_set().map(|(x, y)| (x as i128, y as i128)).collect();
        let n = pts.len() as i128;
        let sx: i128 = pts.iter().map(|p| p.0).sum();
        let sy: i128 = pts.iter().map(|p| p.1).sum();
        let mut acc = [[0i128; 2]; 2];
        for &(x, y) in &pts {
            let d = [n * x - sx, n * y - sy];
            for i in 0..2 {
                for j in 0..2 {
                    acc[i][j] += d[i] * d[j];
                }
            }
        }
        let n3 = (n * n * n) as f64;
        let cov = [
            [acc[0][0] as f64 / n3, acc[0][1] as f64 / n3],
            [acc[1][0] as f64 / n3, acc[1][1] as f64 / n3],
        ];
        ([sx as f64 / n as f64, sy as f64 / n as f64], cov)
    }

    #[test]
    fn single_pixel() {
        let s = mask_stats(&grid_from(8, 8, &[(3, 5)])).unwrap();
        assert_eq!(s.centroid, (3.0, 5.0));
        assert_eq!(s.covariance, [[0.0; 2]; 2]);
        let o = orientation_of(&s);
        assert!(o.isotropic);
        assert_eq!(o.angle_deg, 0.0);
    }

    #[test]
    fn two_by_two_block() {
        let s = mask_stats(&grid_from(8, 8, &[(0, 0), (1, 0), (0, 1), (1, 1)])).unwrap();
        assert_eq!(s.centroid, (0.5, 0.5));
        assert_eq!(s.covariance, [[0.25, 0.0], [0.0, 0.25]]);
    }

    #[test]
    fn random_blob_matches_pixel_loop_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut g = BinaryGrid::new(40, 40);
        while g.count() < 200 {
            g.set(rng.gen_range(0..40), rng.gen_range(0..40), true);
        }
        let s = mask_stats(&g).unwrap();
        let (c, cov) = oracle(&g);
        assert_eq!([s.centroid.0, s.centroid.1], c);
        assert_eq!(s.covariance, cov);
        assert_eq!(s.pixel_count, 200);
    }

    #[test]
    fn empty_region_error() {
        let seg = SegmentationMap::new(8, 8, vec![PixelClass::Background; 64]).unwrap();
        assert!(matches!(
            region_stats(&seg, Region::Shadow),
            Err(Error::EmptyRegion(Region::Shadow))
        ));
    }

    #[test]
    fn horizontal_bar_is_zero_degrees() {
        let g = BinaryGrid::from_fn(32, 32, |x, y| (6..26).contains(&x) && (14..18).contains(&y));
        let o = mask_orientation(&g).unwrap();
        assert_eq!(o.angle_deg, 0.0);
        assert!(!o.isotropic);
    }

    #[test]
    fn rotated_bar_30_degrees() {
        let g = rotated_bar(64, 64, 40.0, 8.0, 30.0);
        let o = mask_orientation(&g).unwrap();
        assert!((o.angle_deg - 30.0).abs() <= 2.0, "{}", o.angle_deg);
    }

    #[test]
    fn disc_is_isotropic() {
        let g = BinaryGrid::from_fn(41, 41, |x, y| {
            let (dx, dy) = (x as f64 - 20.0, y as f64 - 20.0);
            dx * dx + dy * dy <= 15.0 * 15.0
        });
        let o = mask_orientation(&g).unwrap();
        assert!(o.isotropic);
        assert_eq!(o.angle_deg, 0.0);
    }

    #[test]
    fn rotation_equivariance_every_15_degrees() {
        let base = mask_orientation(&rotated_bar(96, 96, 50.0, 12.0, 0.0)).unwrap();
        for k in 1..12 {
            let delta = 15.0 * k as f64;
            let o = mask_orientation(&rotated_bar(96, 96, 50.0, 12.0, delta)).unwrap();
            let expected = fold_axial(base.angle_deg + delta);
            assert!(axial_distance(o.angle_deg, expected) <= 3.0, "{delta}: {}", o.angle_deg);
        }
    }

    #[test]
    fn nearest_neighbour_upsampling() {
        let g = rotated_bar(48, 48, 30.0, 8.0, 35.0);
        let up = BinaryGrid::from_fn(96, 96, |x, y| g.get(x / 2, y / 2));
        let (s, su) = (mask_stats(&g).unwrap(), mask_stats(&up).unwrap());
        let (o, ou) = (orientation_of(&s), orientation_of(&su));
        assert!(axial_distance(o.angle_deg, ou.angle_deg) <= 2.0);
        for i in 0..2 {
            let ratio = su.covariance[i][i] / s.covariance[i][i];
            assert!((ratio - 4.0).abs() <= 0.4, "{ratio}");
        }
    }

    #[test]
    fn folding_helpers() {
        assert_eq!(fold_axial(-30.0), 150.0);
        assert_eq!(fold_axial(180.0), 0.0);
        assert_eq!(axial_distance(170.0, 10.0), 20.0);
        assert_eq!(axial_distance(90.0, 0.0), 90.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn translation_is_bit_identical(
            pixels in proptest::collection::vec((0usize..20, 0usize..20), 1..60),
            dx in 0usize..40, dy in 0usize..40,
        ) {
            let a = stats_of_pixels(pixels.iter().copied()).unwrap();
            let b = stats_of_pixels(pixels.iter().map(|&(x, y)| (x + dx, y + dy))).unwrap();
            prop_assert_eq!(a.covariance, b.covariance);
            prop_assert_eq!(orientation_of(&a), orientation_of(&b));
        }

        #[test]
        fn eigenpair_residual_and_psd(
            pixels in proptest::collection::vec((0usize..30, 0usize..30), 2..80),
        ) {
            let s = stats_of_pixels(pixels.iter().copied()).unwrap();
            let o = orientation_of(&s);
            prop_assert!(o.major_eigenvalue >= o.minor_eigenvalue && o.minor_eigenvalue >= 0.0);
            prop_assert!((0.0..180.0).contains(&o.angle_deg));
            if !o.isotropic {
                // y-up covariance
                let (a, b, c) = (s.covariance[0][0], -s.covariance[0][1], s.covariance[1][1]);
                let (vx, vy) = o.major_axis;
                let rx = a * vx + b * vy - o.major_eigenvalue * vx;
                let ry = b * vx + c * vy - o.major_eigenvalue * vy;
                prop_assert!(rx.hypot(ry) <= 1e-9 * o.major_eigenvalue.max(1e-300));
            }
        }
    }
}
