//! Hidden point removal by spherical flipping.
//!
//! Each point is reflected through a sphere of radius `R` centered on the
//! viewpoint, `p' = p + 2 (R - |p - C|) (p - C) / |p - C|`, and a point is
//! visible exactly when its flipped image is a vertex of the convex hull of the
//! flipped set together with the viewpoint.

use nalgebra::Vector3;

use super::hull::hull_vertices;
use crate::model::PointCloud;

/// Flip radius as a multiple of the farthest point distance.
pub const HPR_GAMMA: f64 = 1.1;

/// Indices (ascending) of the points visible from `viewpoint`.
///
/// Clouds that are too small or too flat for a 3D hull are reported as fully
/// visible.
pub fn hpr_visible_indices(points: &[Vector3<f64>], viewpoint: Vector3<f64>) -> Vec<usize> {
    let all = || (0..points.len()).collect::<Vec<_>>();
    if points.len() < 4 {
        return all();
    }
    let rel: Vec<Vector3<f64>> = points.iter().map(|p| p - viewpoint).collect();
    let max_dist = rel.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_dist == 0.0 {
        return all();
    }
    let radius = HPR_GAMMA * max_dist;

    let mut flipped: Vec<Vector3<f64>> = rel
        .iter()
        .map(|v| {
            let d = v.norm();
            if d == 0.0 {
                *v
            } else {
                v * (2.0 * radius / d - 1.0)
            }
        })
        .collect();
    flipped.push(Vector3::zeros());

    match hull_vertices(&flipped) {
        Some(on_hull) => (0..points.len())
            .filter(|&i| on_hull[i] || rel[i].norm() == 0.0)
            .collect(),
        None => all(),
    }
}

pub fn hpr_visible(cloud: &PointCloud, viewpoint: Vector3<f64>) -> PointCloud {
    PointCloud::new(
        hpr_visible_indices(&cloud.points, viewpoint)
            .into_iter()
            .map(|i| cloud.points[i])
            .collect(),
    )
}
