//! Rendering a positioned point cloud into binary SAS highlight/shadow maps.

use nalgebra::Vector3;

use super::hpr::hpr_visible_indices;
use crate::error::{Error, Result};
use crate::model::{BinaryGrid, LookDirection, PointCloud, SegmentationMap, SensorGeometry};

/// Binary highlight (`I_h`) and shadow (`I_s`) planes on the SAS ROI grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSasMaps {
    pub highlight: BinaryGrid,
    pub shadow: BinaryGrid,
}

impl SyntheticSasMaps {
    pub fn to_segmentation(&self) -> SegmentationMap {
        SegmentationMap::from_masks(&self.highlight, &self.shadow)
            .expect("planes share the grid dimensions")
    }
}

/// Renders `cloud` (x, y in SAS pixels, z in meters) as seen by the sonar.
///
/// Visible points mark their cell as highlight. Each visible point at ground
/// range `r` and height `h` shadows the cells of its row whose range lies in
/// `(r, r + h r / (A - h)]`, flat-seabed similar triangles with sensor
/// altitude `A`. Highlight cells are never shadow.
pub fn render_sas_maps(
    cloud: &PointCloud,
    geom: &SensorGeometry,
    out_dims: (usize, usize),
) -> Result<SyntheticSasMaps> {
    geom.validate()?;
    let (width, height) = out_dims;
    let altitude = geom.altitude_m;
    let spacing = geom.pixel_spacing_m;

    if let Some(p) = cloud.points.iter().find(|p| !(p.z < altitude)) {
        return Err(Error::ObjectAboveSensor {
            height_m: p.z,
            altitude_m: altitude,
        });
    }

    let mut highlight = BinaryGrid::new(width, height);
    let mut shadow = BinaryGrid::new(width, height);
    if cloud.is_empty() {
        return Ok(SyntheticSasMaps { highlight, shadow });
    }

    // visibility in isotropic pixel units
    let scaled: Vec<Vector3<f64>> = cloud
        .points
        .iter()
        .map(|p| Vector3::new(p.x, p.y, p.z.max(0.0) / spacing))
        .collect();
    let (_, cy) = cloud.planar_centroid().expect("non-empty");
    let viewpoint = Vector3::new(geom.sensor_column(width), cy, altitude / spacing);
    let visible = hpr_visible_indices(&scaled, viewpoint);

    let cell = |p: &Vector3<f64>| -> Option<(usize, usize)> {
        let (x, y) = (p.x.round(), p.y.round());
        (x >= 0.0 && y >= 0.0 && (x as usize) < width && (y as usize) < height)
            .then(|| (x as usize, y as usize))
    };

    for &i in &visible {
        if let Some((x, y)) = cell(&cloud.points[i]) {
            highlight.set(x, y, true);
        }
    }
    close_single_gaps(&mut highlight);

    for &i in &visible {
        let p = &cloud.points[i];
        let h = p.z.max(0.0);
        if h == 0.0 {
            continue;
        }
        let row = p.y.round();
        if row < 0.0 || row as usize >= height {
            continue;
        }
        let row = row as usize;
        let range = geom.ground_range(p.x, width);
        let extent_px = h * range / (altitude - h) / spacing;
        // columns whose center range falls in (r, r + dr]
        let (lo, hi) = match geom.look_direction {
            LookDirection::Right => ((p.x.floor() + 1.0).max(0.0), (p.x + extent_px).floor()),
            LookDirection::Left => ((p.x - extent_px).ceil().max(0.0), p.x.ceil() - 1.0),
        };
        let hi = hi.min(width as f64 - 1.0);
        if hi < lo {
            continue;
        }
        for x in lo as usize..=hi as usize {
            if !highlight.get(x, row) {
                shadow.set(x, row, true);
            }
        }
    }

    Ok(SyntheticSasMaps { highlight, shadow })
}

/// Fills single empty cells enclosed horizontally or vertically by highlight,
/// which appear when a rotated point lattice is rounded onto the grid.
fn close_single_gaps(grid: &mut BinaryGrid) {
    let (w, h) = grid.dims();
    let src = grid.clone();
    for y in 0..h {
        for x in 0..w {
            if src.get(x, y) {
                continue;
            }
            let horizontal = x > 0 && x + 1 < w && src.get(x - 1, y) && src.get(x + 1, y);
            let vertical = y > 0 && y + 1 < h && src.get(x, y - 1) && src.get(x, y + 1);
            if horizontal || vertical {
                grid.set(x, y, true);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom() -> SensorGeometry {
        SensorGeometry::new(5.0, 19.0, 1.0, LookDirection::Right).unwrap()
    }

    #[test]
    fn single_point_shadow_length() {
        // r = 19 + 1 = 20 m, h = 1 m, A = 5 m: dr = 1 * 20 / 4 = 5 m
        let cloud = PointCloud::new(vec![Vector3::new(1.0, 3.0, 1.0)]);
        let maps = render_sas_maps(&cloud, &geom(), (16, 8)).unwrap();
        assert!(maps.highlight.get(1, 3));
        assert_eq!(maps.highlight.count(), 1);
        let shadow: Vec<_> = maps.shadow.iter_set().collect();
        assert_eq!(shadow, (2..=6).map(|x| (x, 3)).collect::<Vec<_>>());
    }

    #[test]
    fn left_look_mirrors() {
        let g = SensorGeometry::new(5.0, 19.0, 1.0, LookDirection::Left).unwrap();
        // column 14 of 16 sits at range 19 + 1 = 20 m
        let cloud = PointCloud::new(vec![Vector3::new(14.0, 3.0, 1.0)]);
        let maps = render_sas_maps(&cloud, &g, (16, 8)).unwrap();
        let shadow: Vec<_> = maps.shadow.iter_set().collect();
        assert_eq!(shadow, (9..=13).map(|x| (x, 3)).collect::<Vec<_>>());
    }

    #[test]
    fn flat_cloud_has_no_shadow() {
        let pts = (0..5)
            .flat_map(|x| (0..5).map(move |y| Vector3::new(x as f64 + 3.0, y as f64 + 2.0, 0.0)))
            .collect();
        let maps = render_sas_maps(&PointCloud::new(pts), &geom(), (16, 12)).unwrap();
        assert!(maps.shadow.is_empty());
        assert_eq!(maps.highlight.count(), 25);
    }

    #[test]
    fn object_above_sensor() {
        let cloud = PointCloud::new(vec![Vector3::new(1.0, 1.0, 5.0)]);
        assert!(matches!(
            render_sas_maps(&cloud, &geom(), (8, 8)),
            Err(Error::ObjectAboveSensor { .. })
        ));
    }

    #[test]
    fn gap_closing_fills_isolated_holes_only() {
        let mut g = BinaryGrid::from_fn(9, 9, |x, y| (2..7).contains(&x) && (2..7).contains(&y));
        g.set(4, 4, false);
        g.set(0, 0, false);
        close_single_gaps(&mut g);
        assert!(g.get(4, 4));
        assert_eq!(g.count(), 25);
    }
}
