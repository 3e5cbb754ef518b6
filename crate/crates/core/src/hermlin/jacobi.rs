//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Pairs `(p, q)` are visited in fixed row-major order each sweep, so the
//! computation is deterministic. Each rotation is the complex plane rotation
//! that annihilates the pivot: factor out the pivot phase, then apply the
//! real symmetric 2x2 rotation to the phased matrix.

use num_complex::Complex64 as C64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Returns unsorted `(eigenvalues, U)` with `U† A U = diag`.
pub(super) fn jacobi_eig(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let mut m = a.clone();
    let mut u = ComplexMatrix::identity(n);
    if n == 1 {
        return Ok((vec![m[(0, 0)].re], u));
    }

    let norm = m.frob_norm();
    let scale = norm.max(1.0);
    let target = 1e-13 * scale;
    let floor = 1e-10 * scale;
    let mut prev_off = f64::INFINITY;
    for sweep in 0..MAX_SWEEPS {
        let off = off_diag_norm(&m);
        if off <= target {
            break;
        }
        if off >= prev_off {
            if off <= floor {
                break; // rounding floor reached
            }
            return Err(Error::EigNonConvergence {
                dim: n,
                sweeps: sweep,
                offdiag: off,
                norm,
            });
        }
        prev_off = off;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut u, p, q);
            }
        }
        if sweep + 1 == MAX_SWEEPS {
            let off = off_diag_norm(&m);
            if off > floor {
                return Err(Error::EigNonConvergence {
                    dim: n,
                    sweeps: MAX_SWEEPS,
                    offdiag: off,
                    norm,
                });
            }
        }
    }
    let vals = (0..n).map(|i| m[(i, i)].re).collect();
    Ok((vals, u))
}

fn off_diag_norm(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            s += 2.0 * m[(p, q)].norm_sqr();
        }
    }
    s.sqrt()
}

fn rotate(m: &mut ComplexMatrix, u: &mut ComplexMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let r = b.norm();
    if r == 0.0 {
        return;
    }
    let phase = b / r; // e^{i phi}
    let phase_c = phase.conj();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.rows();
    // Columns p, q of rows outside the plane, mirrored for symmetry.
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        let new_kp = akp * c - akq * (phase_c * s);
        let new_kq = akp * s + akq * (phase_c * c);
        m[(k, p)] = new_kp;
        m[(p, k)] = new_kp.conj();
        m[(k, q)] = new_kq;
        m[(q, k)] = new_kq.conj();
    }
    m[(p, p)] = C64::new(app - t * r, 0.0);
    m[(q, q)] = C64::new(aqq + t * r, 0.0);
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);

    for k in 0..n {
        let ukp = u[(k, p)];
        let ukq = u[(k, q)];
        u[(k, p)] = ukp * c - ukq * (phase_c * s);
        u[(k, q)] = ukp * s + ukq * (phase_c * c);
    }
}
