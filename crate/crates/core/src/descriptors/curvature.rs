//! Highlight curvature: a low-order polynomial fitted to the left boundary of
//! the highlight region.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::BinaryGrid;

/// Polynomial degree used for the feature vector.
pub const HC_ORDER: usize = 3;

/// Leftmost highlight column per occupied row, as `(row, column)` pairs in
/// ascending row order.
pub fn left_boundary(highlight: &BinaryGrid) -> Vec<(usize, usize)> {
    let (w, h) = highlight.dims();
    (0..h)
        .filter_map(|y| (0..w).find(|&x| highlight.get(x, y)).map(|x| (y, x)))
        .collect()
}

/// Least-squares coefficients of `x = sum_j q_j t^j` over the samples,
/// normalized to unit length with a non-negative leading nonzero entry.
pub(crate) fn fit_normalized(t: &[f64], x: &[f64], order: usize) -> Result<Vec<f64>> {
    let n = t.len();
    let cols = order + 1;
    let mut distinct = t.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < cols {
        return Err(Error::RankDeficientFit {
            order,
            needed: cols,
            found: distinct.len(),
        });
    }

    let v = DMatrix::from_fn(n, cols, |i, j| t[i].powi(j as i32));
    let qr = v.qr();
    let rhs = qr.q().transpose() * DVector::from_column_slice(x);
    let q = qr
        .r()
        .solve_upper_triangular(&rhs)
        .ok_or(Error::RankDeficientFit {
            order,
            needed: cols,
            found: distinct.len(),
        })?;

    let norm = q.norm();
    if norm == 0.0 || !norm.is_finite() {
        let mut unit = vec![0.0; cols];
        unit[0] = 1.0;
        return Ok(unit);
    }
    let sign = match q.iter().find(|c| **c != 0.0) {
        Some(c) if *c < 0.0 => -1.0,
        _ => 1.0,
    };
    Ok(q.iter().map(|c| sign * c / norm).collect())
}

/// Unit-norm polynomial coefficients `(q_0, ..., q_order)` of the left
/// highlight boundary against the row coordinate rescaled to `[0, 1]`.
pub fn highlight_curvature(highlight: &BinaryGrid, order: usize) -> Result<Vec<f64>> {
    let boundary = left_boundary(highlight);
    if boundary.is_empty() {
        return Err(Error::EmptyHighlight);
    }
    let y_min = boundary[0].0 as f64;
    let y_max = boundary[boundary.len() - 1].0 as f64;
    let span = y_max - y_min;
    let t: Vec<f64> = boundary
        .iter()
        .map(|&(y, _)| if span > 0.0 { (y as f64 - y_min) / span } else { 0.0 })
        .collect();
    let x: Vec<f64> = boundary.iter().map(|&(_, x)| x as f64).collect();
    fit_normalized(&t, &x, order)
}
