//! Dense complex linear algebra for the scaling modules.
//!
//! Everything here is deterministic: the eigensolver is a cyclic Jacobi with
//! a fixed sweep order, so identical inputs give bit-identical outputs. Sizes
//! are desk scale (dims up to ~200); storage is row-major `Vec<Complex64>`.
//!
//! The module provides the manifold operations for unit-determinant positive
//! definite Hermitian matrices: geodesic steps, Riemannian distance, square
//! roots and exponentials through the spectral decomposition, and the
//! Weyl-chamber spectral ordering used by the scaling limits.

mod graded;
mod jacobi;

pub use graded::graded_svd_log;

use num_complex::Complex64 as C64;
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Hermitian-symmetry defect allowed on constructed matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance per dimension for traceless Hermitian matrices.
pub const TRACELESS_TOL: f64 = 1e-12;
/// Determinant tolerance for unit-determinant positive definite matrices.
pub const UNIT_DET_TOL: f64 = 1e-8;

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let lhs = i * other.cols;
                let rhs = k * other.cols;
                for j in 0..other.cols {
                    out.data[lhs + j] += a * other.data[rhs + j];
                }
            }
        }
        out
    }

    /// Scales row `i` by `e^{s[i]}` given in log form; caller guarantees the
    /// exponents are representable.
    pub fn scale_rows_exp(&self, s: &[f64]) -> Self {
        debug_assert_eq!(self.rows, s.len());
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s[i].exp())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest Hermitian-symmetry defect `max |m_ij - conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut d: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                d = d.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        d
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

// Wire format: nested JSON arrays of [re, im] pairs, row-major.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = self.row(i).iter().map(|z| [z.re, z.im]).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MatVisitor;
        impl<'de> Visitor<'de> for MatVisitor {
            type Value = ComplexMatrix;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("nested arrays of [re, im] pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<ComplexMatrix, A::Error> {
                let mut rows: Vec<Vec<C64>> = Vec::new();
                while let Some(row) = seq.next_element::<Vec<[f64; 2]>>()? {
                    rows.push(row.into_iter().map(|[re, im]| C64::new(re, im)).collect());
                }
                ComplexMatrix::from_rows(rows).map_err(serde::de::Error::custom)
            }
        }
        deserializer.deserialize_seq(MatVisitor)
    }
}

/// Hermitian matrix; construction projects onto `(M + M†)/2` so the symmetry
/// is exact afterwards.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    /// Projects a square matrix onto its Hermitian part.
    pub fn project(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !m.all_finite() {
            return Err(Error::InvalidInstance("non-finite entries".into()));
        }
        let n = m.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Ok(Self { mat: out })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn from_diag_real(d: &[f64]) -> Self {
        Self {
            mat: ComplexMatrix::from_diag_real(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace_re(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn frob_norm(&self) -> f64 {
        self.mat.frob_norm()
    }

    pub fn is_traceless(&self) -> bool {
        self.trace_re().abs() <= TRACELESS_TOL * self.dim() as f64
    }

    /// Subtracts `(tr/n) I`.
    pub fn make_traceless(&self) -> Self {
        let n = self.dim();
        let shift = self.trace_re() / n as f64;
        let mut mat = self.mat.clone();
        for i in 0..n {
            mat[(i, i)] -= C64::new(shift, 0.0);
        }
        Self { mat }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: self.mat.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.add(&other.mat),
        }
    }

    /// Frobenius inner product `tr(A B)`; real because both are Hermitian,
    /// so `tr(A B) = sum_ij A_ij conj(B_ij)`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.mat
            .data()
            .iter()
            .zip(other.mat.data())
            .map(|(a, b)| (a * b.conj()).re)
            .sum::<f64>()
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ComplexMatrix::deserialize(deserializer)?;
        HermitianMatrix::project(&raw).map_err(serde::de::Error::custom)
    }
}

/// Unit-determinant positive definite Hermitian matrix, the descent iterate.
///
/// Construction verifies positivity (via a Cholesky factorization, whose
/// success is the certificate) and renormalizes the determinant to one by
/// dividing by `det^{1/n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdUnitDetMatrix {
    mat: ComplexMatrix,
}

impl PdUnitDetMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(n),
        }
    }

    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let n = h.dim();
        let (_, log_det) = cholesky(h.as_matrix())?;
        let scale = (-log_det / n as f64).exp();
        let mat = h.as_matrix().scale(scale);
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// `|det - 1|` computed through a fresh Cholesky factorization.
    pub fn det_defect(&self) -> Result<f64> {
        let (_, log_det) = cholesky(&self.mat)?;
        Ok((log_det.exp() - 1.0).abs())
    }

    /// Spectral power `x^a` as a raw Hermitian matrix.
    pub fn powf(&self, a: f64) -> Result<ComplexMatrix> {
        let h = HermitianMatrix::project(&self.mat)?;
        let (vals, u) = herm_eig(&h, EigOrder::Ascending)?;
        if vals[0] <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                index: 0,
                value: vals[0],
            });
        }
        Ok(spectral_apply(&vals, &u, |x| x.powf(a)))
    }
}

impl<'de> Deserialize<'de> for PdUnitDetMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let h = HermitianMatrix::deserialize(deserializer)?;
        PdUnitDetMatrix::new(h).map_err(serde::de::Error::custom)
    }
}

/// Eigenvalue ordering for [`herm_eig`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigOrder {
    Ascending,
    Descending,
}

/// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi.
///
/// Returns `(lambda, u)` with `u† H u = diag(lambda)`, eigenvalues sorted per
/// `order`, columns of `u` the matching eigenvectors. The sweep order is
/// fixed, so results are reproducible bit-for-bit. Under eigenvalue ties the
/// individual eigenvectors are not canonical; only eigenspace projections
/// are.
pub fn herm_eig(h: &HermitianMatrix, order: EigOrder) -> Result<(Vec<f64>, ComplexMatrix)> {
    let (mut vals, mut u) = jacobi::jacobi_eig(h.as_matrix())?;
    sort_spectrum(&mut vals, &mut u, order);
    Ok((vals, u))
}

fn sort_spectrum(vals: &mut [f64], u: &mut ComplexMatrix, order: EigOrder) {
    let n = vals.len();
    let mut idx: Vec<usize> = (0..n).collect();
    match order {
        EigOrder::Ascending => idx.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap()),
        EigOrder::Descending => idx.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap()),
    }
    let old_vals = vals.to_vec();
    let old_u = u.clone();
    for (new, &old) in idx.iter().enumerate() {
        vals[new] = old_vals[old];
        for r in 0..n {
            u[(r, new)] = old_u[(r, old)];
        }
    }
}

/// Applies a scalar function to the spectrum: `U diag(f(lambda)) U†`,
/// Hermitian by construction.
pub fn spectral_apply(vals: &[f64], u: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = vals.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[(i, k)] * f(vals[k]) * u[(j, k)].conj();
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Hermitian square root of a positive definite unit-determinant matrix.
///
/// The result multiplied by itself reproduces the input to `1e-9 * norm`.
pub fn pd_sqrt(x: &PdUnitDetMatrix) -> Result<ComplexMatrix> {
    let h = HermitianMatrix::project(x.as_matrix())?;
    let (vals, u) = herm_eig(&h, EigOrder::Ascending)?;
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            value: vals[0],
        });
    }
    Ok(spectral_apply(&vals, &u, f64::sqrt))
}

/// Matrix exponential of a Hermitian matrix through its spectrum.
pub fn herm_exp(h: &HermitianMatrix) -> Result<ComplexMatrix> {
    let (vals, u) = herm_eig(h, EigOrder::Ascending)?;
    Ok(spectral_apply(&vals, &u, f64::exp))
}

/// Geodesic step on the unit-determinant positive definite manifold.
///
/// `dir` is the step direction parallel-transported to the identity (a
/// traceless Hermitian matrix); the result is
/// `x^{1/2} exp(dir) x^{1/2}`, re-Hermitized and determinant-renormalized.
/// The step moves Riemannian distance `‖dir‖_F` from `x`.
pub fn geodesic_step(x: &PdUnitDetMatrix, dir: &HermitianMatrix) -> Result<PdUnitDetMatrix> {
    if x.dim() != dir.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dim {} vs direction dim {}",
            x.dim(),
            dir.dim()
        )));
    }
    if !dir.is_traceless() {
        return Err(Error::InvalidInstance(format!(
            "geodesic direction has trace {:.3e}",
            dir.trace_re()
        )));
    }
    let s = pd_sqrt(x)?;
    let e = herm_exp(dir)?;
    let raw = s.mul(&e).mul(&s);
    PdUnitDetMatrix::new(HermitianMatrix::project(&raw)?)
}

/// Riemannian distance `‖log(x^{-1/2} y x^{-1/2})‖_F` between two
/// unit-determinant positive definite matrices.
pub fn pd_distance(x: &PdUnitDetMatrix, y: &PdUnitDetMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pd_distance dims {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    let xinv_sqrt = x.powf(-0.5)?;
    let m = xinv_sqrt.mul(y.as_matrix()).mul(&xinv_sqrt);
    let h = HermitianMatrix::project(&m)?;
    let (vals, _) = herm_eig(&h, EigOrder::Ascending)?;
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            value: vals[0],
        });
    }
    Ok(vals.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// Spectra of a Hermitian pair in the Weyl-chamber convention of the
/// left-right action: `p` nonincreasing, `q` nondecreasing.
pub fn weyl_spec(h: &HermitianMatrix, g: &HermitianMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let (p, _) = herm_eig(h, EigOrder::Descending)?;
    let (q, _) = herm_eig(g, EigOrder::Ascending)?;
    Ok((p, q))
}

/// Complex Cholesky factorization of a Hermitian positive definite matrix.
///
/// Returns the lower factor (row-major, dense) and `log det`. Fails with the
/// offending pivot if the matrix is not positive definite.
pub fn cholesky(m: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    debug_assert!(m.is_square());
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for r in 0..j {
            d -= l[(j, r)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        log_det += 2.0 * ljj.ln();
        for i in (j + 1)..n {
            let mut acc = m[(i, j)];
            for r in 0..j {
                acc -= l[(i, r)] * l[(j, r)].conj();
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok((l, log_det))
}

/// Orthonormalizes the rows of `m` in place by modified Gram-Schmidt.
/// Rows must be linearly independent.
pub fn orthonormalize_rows(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut out = m.clone();
    for i in 0..rows {
        for k in 0..i {
            // <row_k, row_i> with the Hermitian inner product on rows.
            let mut dot = C64::new(0.0, 0.0);
            for j in 0..cols {
                dot += out[(k, j)].conj() * out[(i, j)];
            }
            for j in 0..cols {
                let sub = dot * out[(k, j)];
                out[(i, j)] -= sub;
            }
        }
        let norm = out.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::InvalidInstance(
                "rows are not linearly independent".into(),
            ));
        }
        for j in 0..cols {
            out[(i, j)] /= norm;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
