//! Seeded random matrix generation.
//!
//! Everything goes through `ChaCha8Rng` so any consumer that fixes a seed
//! gets identical instances across runs and platforms.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::hermlin::{orthonormalize_rows, ComplexMatrix, HermitianMatrix, PdUnitDetMatrix};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal via Box-Muller; deterministic given the rng stream.
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(normal(rng), normal(rng))
}

pub fn random_complex_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianMatrix {
    let raw = random_complex_matrix(rng, n, n).scale(scale);
    HermitianMatrix::project(&raw).expect("square by construction")
}

pub fn random_traceless_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianMatrix {
    random_hermitian(rng, n, scale).make_traceless()
}

/// Haar-flavored unitary: Gram-Schmidt of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let raw = random_complex_matrix(rng, n, n);
    orthonormalize_rows(&raw).expect("Gaussian matrix is full rank")
}

/// Random unit-determinant positive definite matrix with log-eigenvalues
/// uniform in `[-log_spread, log_spread]`, recentered to zero sum.
pub fn random_pd_unit_det(rng: &mut ChaCha8Rng, n: usize, log_spread: f64) -> PdUnitDetMatrix {
    let u = random_unitary(rng, n);
    let mut logs: Vec<f64> = (0..n).map(|_| rng.gen_range(-log_spread..=log_spread)).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    for l in &mut logs {
        *l -= mean;
    }
    let d = ComplexMatrix::from_diag_real(&logs.iter().map(|l| l.exp()).collect::<Vec<_>>());
    let x = u.adjoint().mul(&d).mul(&u);
    PdUnitDetMatrix::new(HermitianMatrix::project(&x).unwrap()).expect("positive by construction")
}

/// Determinant by LU with partial pivoting; used only to strip the unit
/// phase off unitary factors.
pub fn complex_det(m: &ComplexMatrix) -> C64 {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    let mut det = C64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = a[(k, k)].norm();
        for i in (k + 1)..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if piv != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = tmp;
            }
            det = -det;
        }
        let akk = a[(k, k)];
        det *= akk;
        for i in (k + 1)..n {
            let f = a[(i, k)] / akk;
            for j in k..n {
                let sub = f * a[(k, j)];
                a[(i, j)] -= sub;
            }
        }
    }
    det
}

/// Random element of the special linear group with condition number at most
/// `max_condition`: unitary x diagonal(bounded log) x unitary, then the
/// determinant phase is divided out.
pub fn random_special_linear(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_condition: f64,
) -> Result<ComplexMatrix> {
    assert!(max_condition >= 1.0);
    let half_log = max_condition.ln() / 2.0;
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let mut logs: Vec<f64> = (0..n).map(|_| rng.gen_range(-half_log..=half_log)).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    for l in &mut logs {
        *l -= mean;
    }
    let d = ComplexMatrix::from_diag_real(&logs.iter().map(|l| l.exp()).collect::<Vec<_>>());
    let g = u.mul(&d).mul(&v);
    let det = complex_det(&g);
    let phase = det / det.norm();
    // n-th root of the phase.
    let root = C64::from_polar(1.0, -phase.arg() / n as f64);
    Ok(g.scale_complex(root))
}
