//! Explicit parallel-beam projection matrix with exact ray–pixel
//! intersection lengths (Siddon traversal).
//!
//! Pixels have unit width; the image occupies `[-L/2, L/2]²` with row 0 at
//! the top. Each angle has `L` detector bins at unit spacing whose rays pass
//! through the bin centres `t_b = b - (L-1)/2`. The ray for `(θ, t)` is
//! `{ (x, y) : x cos θ + y sin θ = t }`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::DenseMap;

const EPS: f64 = 1e-12;

/// Add the intersection lengths of one ray to `row` (row-major image).
fn trace_ray(side: usize, theta: f64, t: f64, row: &mut [f64]) {
    let half = side as f64 / 2.0;
    let (s, c) = theta.sin_cos();
    // point on the ray and unit direction
    let (px, py) = (t * c, t * s);
    let (dx, dy) = (-s, c);

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            if p <= -half || p >= half {
                return;
            }
        } else {
            let a = (-half - p) / d;
            let b = (half - p) / d;
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
    }
    if hi - lo <= EPS {
        return;
    }

    let mut cuts = vec![lo, hi];
    for (p, d) in [(px, dx), (py, dy)] {
        if d.abs() < EPS {
            continue;
        }
        for k in 0..=side {
            let s_k = (k as f64 - half - p) / d;
            if s_k > lo && s_k < hi {
                cuts.push(s_k);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);

    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= EPS {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let x = px + mid * dx;
        let y = py + mid * dy;
        let col = (x + half).floor();
        let rw = (half - y).floor();
        if col < 0.0 || rw < 0.0 {
            continue;
        }
        let (col, rw) = (col as usize, rw as usize);
        if col < side && rw < side {
            row[rw * side + col] += len;
        }
    }
}

/// `(angles.len()·side) × side²` projection matrix; row `a·side + b` is the
/// ray at angle `angles[a]` through detector bin `b`.
pub fn radon_matrix(side: usize, angles: &[f64]) -> Result<DenseMap> {
    if side < 2 {
        return Err(Error::Input(format!("image side must be at least 2, got {side}")));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::Input("projection angles must be finite".into()));
    }
    let p = side * side;
    let rows = angles.len() * side;
    let mut data = vec![0.0; rows * p];
    let fill = |(r, row): (usize, &mut [f64])| {
        let theta = angles[r / side];
        let t = (r % side) as f64 - (side as f64 - 1.0) / 2.0;
        trace_ray(side, theta, t, row);
    };
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(p).enumerate().for_each(fill);
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(p).enumerate().for_each(fill);
    DenseMap::new(rows, p, data)
}
