//! Wolfe's minimum-norm-point algorithm over a finite point set.
//!
//! Maintains a corral of affinely independent points and its convex weights.
//! Each major cycle brings in the point minimizing the inner product with
//! the current iterate (lowest index on ties); minor cycles solve the
//! affine minimum-norm problem on the corral by Cholesky on the Gram matrix
//! with a pivot floor, stepping back to the feasible boundary and dropping
//! zero-weight points until the affine solution is interior.

use super::dot;
use crate::error::{Error, Result};

const PIVOT_FLOOR: f64 = 1e-12;
const WEIGHT_FLOOR: f64 = 1e-12;

/// The unique minimum-norm point of `Conv(points)`.
///
/// On return the KKT certificate holds: `p . w >= |w|^2 - 1e-9` for every
/// input point `p`.
pub fn min_norm_oracle(points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Err(Error::InvalidInstance("empty point list".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("points of mixed dimension".into()));
    }

    let scale = points
        .iter()
        .map(|p| dot(p, p))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let stop_tol = 1e-11 * scale;

    // Start from the lowest-index point of minimum norm.
    let start = (0..points.len())
        .min_by(|&a, &b| {
            dot(&points[a], &points[a])
                .partial_cmp(&dot(&points[b], &points[b]))
                .unwrap()
        })
        .unwrap();
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut w = points[start].clone();

    let guard = 1000 + 64 * points.len();
    let mut pivots = 0usize;
    loop {
        // Entering point: minimize <w, p>, lowest index on ties.
        let mut best = 0usize;
        let mut best_val = dot(&w, &points[0]);
        for (idx, p) in points.iter().enumerate().skip(1) {
            let v = dot(&w, p);
            if v < best_val {
                best_val = v;
                best = idx;
            }
        }
        if best_val >= dot(&w, &w) - stop_tol {
            break;
        }
        if corral.contains(&best) {
            // The would-be entering point is already in the corral; the
            // iterate cannot improve further at this precision.
            break;
        }
        corral.push(best);
        weights.push(0.0);

        // Minor cycles: move to the affine minimum-norm point of the corral,
        // stepping back to the simplex boundary whenever it leaves.
        loop {
            pivots += 1;
            if pivots > guard {
                return Err(Error::OracleCycling { iters: pivots });
            }
            let affine = affine_min_norm(points, &corral)?;
            if affine.iter().all(|&v| v > WEIGHT_FLOOR) {
                weights = affine;
                break;
            }
            // Largest theta keeping (1-theta) w + theta v nonnegative.
            let mut theta = 1.0f64;
            for (lam, v) in weights.iter().zip(&affine) {
                if *v < WEIGHT_FLOOR && lam > v {
                    theta = theta.min(lam / (lam - v));
                }
            }
            for (lam, v) in weights.iter_mut().zip(&affine) {
                *lam = (1.0 - theta) * *lam + theta * v;
            }
            let keep: Vec<usize> = (0..corral.len())
                .filter(|&i| weights[i] > WEIGHT_FLOOR)
                .collect();
            if keep.is_empty() {
                return Err(Error::OracleCycling { iters: pivots });
            }
            corral = keep.iter().map(|&i| corral[i]).collect();
            weights = keep.iter().map(|&i| weights[i]).collect();
            let total: f64 = weights.iter().sum();
            for lam in &mut weights {
                *lam /= total;
            }
        }
        w = combination(points, &corral, &weights, dim);
    }

    w = combination(points, &corral, &weights, dim);
    let wn = dot(&w, &w);
    for p in points {
        if dot(p, &w) < wn - 1e-9 {
            return Err(Error::Corrupt(format!(
                "minimum-norm certificate failed: <p, w> = {:.3e} < |w|^2 = {:.3e}",
                dot(p, &w),
                wn
            )));
        }
    }
    Ok(w)
}

fn combination(points: &[Vec<f64>], corral: &[usize], weights: &[f64], dim: usize) -> Vec<f64> {
    let mut w = vec![0.0; dim];
    for (&idx, &lam) in corral.iter().zip(weights) {
        for (wi, pi) in w.iter_mut().zip(&points[idx]) {
            *wi += lam * pi;
        }
    }
    w
}

/// Barycentric coordinates of the minimum-norm point of the affine hull of
/// the corral: solve `G y = 1` by floored Cholesky, normalize to sum one.
fn affine_min_norm(points: &[Vec<f64>], corral: &[usize]) -> Result<Vec<f64>> {
    let k = corral.len();
    let mut gram = vec![0.0f64; k * k];
    for a in 0..k {
        for b in 0..k {
            gram[a * k + b] = dot(&points[corral[a]], &points[corral[b]]);
        }
    }
    // Cholesky with pivot floor.
    let mut l = vec![0.0f64; k * k];
    for j in 0..k {
        let mut d = gram[j * k + j];
        for r in 0..j {
            d -= l[j * k + r] * l[j * k + r];
        }
        l[j * k + j] = d.max(PIVOT_FLOOR).sqrt();
        for i in (j + 1)..k {
            let mut acc = gram[i * k + j];
            for r in 0..j {
                acc -= l[i * k + r] * l[j * k + r];
            }
            l[i * k + j] = acc / l[j * k + j];
        }
    }
    // Forward then back substitution for G y = 1.
    let mut z = vec![0.0f64; k];
    for i in 0..k {
        let mut acc = 1.0;
        for r in 0..i {
            acc -= l[i * k + r] * z[r];
        }
        z[i] = acc / l[i * k + i];
    }
    let mut y = vec![0.0f64; k];
    for i in (0..k).rev() {
        let mut acc = z[i];
        for r in (i + 1)..k {
            acc -= l[r * k + i] * y[r];
        }
        y[i] = acc / l[i * k + i];
    }
    let total: f64 = y.iter().sum();
    if total.abs() < 1e-300 {
        return Err(Error::OracleCycling { iters: 0 });
    }
    Ok(y.iter().map(|v| v / total).collect())
}
