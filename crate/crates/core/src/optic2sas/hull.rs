//! Incremental 3D convex hull (quickhull with conflict lists), reporting which
//! input points are hull vertices.

use std::collections::HashMap;

use nalgebra::Vector3;

type P = Vector3<f64>;

struct Face {
    v: [usize; 3],
    normal: P,
    offset: f64,
    alive: bool,
    conflicts: Vec<usize>,
}

impl Face {
    fn new(points: &[P], v: [usize; 3]) -> Self {
        let n = (points[v[1]] - points[v[0]]).cross(&(points[v[2]] - points[v[0]]));
        let len = n.norm();
        let normal = if len > 0.0 { n / len } else { P::zeros() };
        Face {
            v,
            normal,
            offset: normal.dot(&points[v[0]]),
            alive: true,
            conflicts: Vec::new(),
        }
    }

    #[inline]
    fn distance(&self, p: &P) -> f64 {
        self.normal.dot(p) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        let [a, b, c] = self.v;
        [(a, b), (b, c), (c, a)]
    }
}

/// Marks the hull vertices of `points`. Returns `None` when the set does not
/// span three dimensions.
pub(crate) fn hull_vertices(points: &[P]) -> Option<Vec<bool>> {
    if points.len() < 4 || points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
        return None;
    }
    let (lo, hi) = points.iter().fold(
        (P::repeat(f64::INFINITY), P::repeat(f64::NEG_INFINITY)),
        |(lo, hi), p| (lo.inf(p), hi.sup(p)),
    );
    let scale = (hi - lo).norm();
    if scale == 0.0 {
        return None;
    }
    let eps = 1e-10 * scale;

    let simplex = initial_simplex(points, eps)?;
    let interior = simplex.iter().map(|&i| points[i]).sum::<P>() / 4.0;

    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let [a, b, c, d] = simplex;
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = Face::new(points, tri);
        if f.distance(&interior) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        let id = faces.len();
        for e in f.edges() {
            edges.insert(e, id);
        }
        faces.push(f);
    }

    for (i, p) in points.iter().enumerate() {
        if simplex.contains(&i) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.conflicts.push(i);
        }
    }

    let mut pending: Vec<usize> = (0..faces.len()).collect();
    while let Some(fid) = pending.pop() {
        if !faces[fid].alive || faces[fid].conflicts.is_empty() {
            continue;
        }
        // farthest conflict point, lowest index on ties
        let apex = {
            let f = &faces[fid];
            let mut best = f.conflicts[0];
            let mut best_d = f.distance(&points[best]);
            for &i in &f.conflicts[1..] {
                let d = f.distance(&points[i]);
                if d > best_d {
                    best = i;
                    best_d = d;
                }
            }
            best
        };
        let apex_p = points[apex];

        // connected set of faces that see the apex
        let mut visible = vec![fid];
        let mut is_visible: HashMap<usize, bool> = HashMap::from([(fid, true)]);
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for (a, b) in faces[f].edges() {
                let Some(&nb) = edges.get(&(b, a)) else { continue };
                if is_visible.contains_key(&nb) {
                    continue;
                }
                let vis = faces[nb].distance(&apex_p) > eps;
                is_visible.insert(nb, vis);
                if vis {
                    visible.push(nb);
                }
            }
        }

        let mut horizon = Vec::new();
        for &f in &visible {
            for (a, b) in faces[f].edges() {
                let twin = edges.get(&(b, a)).copied();
                if twin.map_or(true, |t| !is_visible.get(&t).copied().unwrap_or(false)) {
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            for e in faces[f].edges() {
                if edges.get(&e) == Some(&f) {
                    edges.remove(&e);
                }
            }
            orphans.extend(faces[f].conflicts.drain(..).filter(|&i| i != apex));
        }

        let first_new = faces.len();
        for (a, b) in horizon {
            let f = Face::new(points, [a, b, apex]);
            let id = faces.len();
            for e in f.edges() {
                edges.insert(e, id);
            }
            faces.push(f);
        }
        for i in orphans {
            let p = &points[i];
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.distance(p) > eps) {
                f.conflicts.push(i);
            }
        }
        pending.extend(first_new..faces.len());
    }

    let mut on_hull = vec![false; points.len()];
    for f in faces.iter().filter(|f| f.alive) {
        for &v in &f.v {
            on_hull[v] = true;
        }
    }
    Some(on_hull)
}

fn initial_simplex(points: &[P], eps: f64) -> Option<[usize; 4]> {
    let i0 = (0..points.len())
        .min_by(|&a, &b| {
            let (p, q) = (&points[a], &points[b]);
            p.x.total_cmp(&q.x)
                .then(p.y.total_cmp(&q.y))
                .then(p.z.total_cmp(&q.z))
        })
        .expect("non-empty");
    let argmax = |f: &dyn Fn(&P) -> f64| -> (usize, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, p) in points.iter().enumerate() {
            let v = f(p);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    };
    let p0 = points[i0];
    let (i1, d1) = argmax(&|p| (p - p0).norm());
    if d1 <= eps {
        return None;
    }
    let dir = (points[i1] - p0) / d1;
    let (i2, d2) = argmax(&|p| {
        let v = p - p0;
        (v - dir * v.dot(&dir)).norm()
    });
    if d2 <= eps {
        return None;
    }
    let n = (points[i1] - p0).cross(&(points[i2] - p0)).normalize();
    let (i3, d3) = argmax(&|p| n.dot(&(p - p0)).abs());
    if d3 <= eps {
        return None;
    }
    Some([i0, i1, i2, i3])
}
