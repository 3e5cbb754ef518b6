//! Operator scaling under the left-right action, by geodesic descent.
//!
//! An instance is a tuple `A = (A_1..A_N)` of complex `n x m` matrices with
//! trivial common kernels. The objective is the log norm of the scaled
//! tuple, `F_A(x, y) = log tr sum_l x A_l y A_l†`, a 2-smooth convex
//! function on pairs of unit-determinant positive definite Hermitian
//! matrices. Its transported gradient is the moment map of the scaled
//! tuple: the pair of normalized Gram deviations from `(I/n, I/m)`.
//!
//! Fixed-step descent from the identity drives the moment-map norm to its
//! infimum. For scalable tuples it reaches zero; otherwise the iterates
//! diverge and carry structure: their sorted log spectra divided by the
//! step count converge to the minimum-norm point `(p*, q*)` of the moment
//! polytope, and the accumulated spectral frames block-triangularize the
//! tuple along its coarse Dulmage-Mendelsohn structure, which
//! [`extract_coarse_blocks`] reads off.
//!
//! Long runs never materialize the iterates: [`run_descent`] carries the
//! state as `x = sigma† e^{diag p} sigma` with the log spectrum `p` kept as
//! plain reals (see [`SpectralState`]), so divergence to `e^{±1000}` scale
//! and beyond is routine.

mod engine;

use num_complex::Complex64 as C64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hermlin::{
    geodesic_step, herm_eig, pd_sqrt, ComplexMatrix, EigOrder, HermitianMatrix, PdUnitDetMatrix,
};

/// Default smoothness constant of the scaling objective.
pub const DEFAULT_L_SMOOTH: f64 = 2.0;
/// Default relative support tolerance for recession values.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// An operator-scaling instance: `N` complex `n x m` matrices with trivial
/// common kernels on both sides.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    n: usize,
    m: usize,
    matrices: Vec<ComplexMatrix>,
}

impl MatrixTuple {
    /// Validates dimensions, nonzero norm, and trivial common kernels.
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let t = Self::new_unchecked(matrices)?;
        t.validate_kernels()?;
        Ok(t)
    }

    /// Dimension checks only; kernel triviality is not verified. Needed for
    /// deliberately degenerate single-matrix fixtures.
    pub fn new_unchecked(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::InvalidInstance("empty tuple".into()))?;
        let (n, m) = (first.rows(), first.cols());
        if n == 0 || m == 0 {
            return Err(Error::InvalidInstance("zero-dimensional tuple".into()));
        }
        if matrices.iter().any(|a| a.rows() != n || a.cols() != m) {
            return Err(Error::DimensionMismatch(
                "tuple matrices of mixed shape".into(),
            ));
        }
        if matrices.iter().any(|a| !a.all_finite()) {
            return Err(Error::InvalidInstance("non-finite entries".into()));
        }
        Ok(Self { n, m, matrices })
    }

    /// Rank check through the Gram matrices: the stacked tuple has full
    /// column (row) rank iff `sum A†A` (`sum AA†`) is positive definite.
    pub fn validate_kernels(&self) -> Result<()> {
        let norm_sq = self.frob_norm_sq();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidInstance("zero tuple".into()));
        }
        let mut right = ComplexMatrix::zeros(self.m, self.m);
        let mut left = ComplexMatrix::zeros(self.n, self.n);
        for a in &self.matrices {
            right = right.add(&a.adjoint().mul(a));
            left = left.add(&a.mul(&a.adjoint()));
        }
        for (gram, side) in [(right, "right"), (left, "left")] {
            let h = HermitianMatrix::project(&gram)?;
            let (vals, _) = herm_eig(&h, EigOrder::Ascending)?;
            if vals[0] <= 1e-10 * norm_sq {
                return Err(Error::InvalidInstance(format!(
                    "common {side} kernel is nontrivial (Gram eigenvalue {:.3e})",
                    vals[0]
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn frob_norm_sq(&self) -> f64 {
        self.matrices.iter().map(ComplexMatrix::frob_norm_sq).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        self.frob_norm_sq().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            m: self.m,
            matrices: self.matrices.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// A nonnegative matrix as a tuple of rank-one monomial matrices
    /// `sqrt(a_ij) e_i e_j^T`: diagonal scaling of the tuple is matrix
    /// scaling of `(a_ij)`.
    pub fn monomial(mabs2: &[Vec<f64>]) -> Result<Self> {
        let n = mabs2.len();
        let m = mabs2.first().map_or(0, Vec::len);
        let mut matrices = Vec::new();
        for (i, row) in mabs2.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch("ragged matrix".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInstance(format!(
                        "entry ({i},{j}) must be finite and nonnegative"
                    )));
                }
                if v > 0.0 {
                    let mut e = ComplexMatrix::zeros(n, m);
                    e[(i, j)] = C64::new(v.sqrt(), 0.0);
                    matrices.push(e);
                }
            }
        }
        Self::new(matrices)
    }
}

impl Serialize for MatrixTuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("MatrixTuple", 4)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("N", &self.matrices.len())?;
        st.serialize_field("matrices", &self.matrices)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for MatrixTuple {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            m: usize,
            #[serde(rename = "N")]
            count: usize,
            matrices: Vec<ComplexMatrix>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.matrices.len() != raw.count {
            return Err(serde::de::Error::custom(format!(
                "N = {} but {} matrices present",
                raw.count,
                raw.matrices.len()
            )));
        }
        let t = MatrixTuple::new_unchecked(raw.matrices).map_err(serde::de::Error::custom)?;
        if t.n != raw.n || t.m != raw.m {
            return Err(serde::de::Error::custom(format!(
                "declared shape {}x{} but matrices are {}x{}",
                raw.n, raw.m, t.n, t.m
            )));
        }
        Ok(t)
    }
}

/// Descent iterate: a pair of unit-determinant positive definite matrices.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingState {
    pub x: PdUnitDetMatrix,
    pub y: PdUnitDetMatrix,
}

impl ScalingState {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            x: PdUnitDetMatrix::identity(n),
            y: PdUnitDetMatrix::identity(m),
        }
    }
}

/// Value of the moment map: a pair of traceless Hermitian matrices.
#[derive(Clone, Debug)]
pub struct MomentValue {
    pub first: HermitianMatrix,
    pub second: HermitianMatrix,
}

impl MomentValue {
    pub fn norm(&self) -> f64 {
        (self.first.frob_norm().powi(2) + self.second.frob_norm().powi(2)).sqrt()
    }
}

/// Kempf-Ness value `log tr sum_l x A_l y A_l†`.
///
/// Cross-checked internally against the equivalent route
/// `log |x^{1/2} A y^{1/2}|^2`; disagreement beyond 1e-9 reports corruption.
pub fn kempf_ness_value(a: &MatrixTuple, s: &ScalingState) -> Result<f64> {
    check_state_dims(a, s)?;
    let mut tr = 0.0;
    for al in a.matrices() {
        let prod = s
            .x
            .as_matrix()
            .mul(al)
            .mul(s.y.as_matrix())
            .mul(&al.adjoint());
        tr += prod.trace().re;
    }
    if !(tr > 0.0) {
        return Err(Error::Corrupt(format!(
            "Kempf-Ness trace must be positive, got {tr:.3e}"
        )));
    }
    let route_one = tr.ln();

    let xh = pd_sqrt(&s.x)?;
    let yh = pd_sqrt(&s.y)?;
    let norm_sq: f64 = a
        .matrices()
        .iter()
        .map(|al| xh.mul(al).mul(&yh).frob_norm_sq())
        .sum();
    let route_two = norm_sq.ln();
    if (route_one - route_two).abs() > 1e-9 * route_one.abs().max(1.0) {
        return Err(Error::Corrupt(format!(
            "Kempf-Ness routes disagree: {route_one:.12e} vs {route_two:.12e}"
        )));
    }
    Ok(route_one)
}

fn check_state_dims(a: &MatrixTuple, s: &ScalingState) -> Result<()> {
    if s.x.dim() != a.n() || s.y.dim() != a.m() {
        return Err(Error::DimensionMismatch(format!(
            "state dims ({}, {}) vs tuple {}x{}",
            s.x.dim(),
            s.y.dim(),
            a.n(),
            a.m()
        )));
    }
    Ok(())
}

pub(crate) fn moment_map_raw(matrices: &[ComplexMatrix]) -> Result<MomentValue> {
    let n = matrices[0].rows();
    let m = matrices[0].cols();
    let norm_sq: f64 = matrices.iter().map(ComplexMatrix::frob_norm_sq).sum();
    if !(norm_sq > 0.0) {
        return Err(Error::InvalidInstance("zero tuple".into()));
    }
    let mut first = ComplexMatrix::zeros(n, n);
    let mut second = ComplexMatrix::zeros(m, m);
    for b in matrices {
        first = first.add(&b.mul(&b.adjoint()));
        second = second.add(&b.adjoint().mul(b));
    }
    for i in 0..n {
        first[(i, i)] -= C64::new(norm_sq / n as f64, 0.0);
    }
    for j in 0..m {
        second[(j, j)] -= C64::new(norm_sq / m as f64, 0.0);
    }
    Ok(MomentValue {
        first: HermitianMatrix::project(&first.scale(1.0 / norm_sq))?,
        second: HermitianMatrix::project(&second.scale(1.0 / norm_sq))?,
    })
}

/// Moment map of a tuple: `(sum BB†, sum B†B) / |B|^2 - (I/n, I/m)`.
pub fn moment_map(b: &MatrixTuple) -> Result<MomentValue> {
    moment_map_raw(b.matrices())
}

/// Transported gradient of the scaling objective at `s`: the moment map of
/// the scaled tuple `(x^{1/2} A_l y^{1/2})`. Its norm equals the Riemannian
/// gradient norm.
pub fn transported_gradient(a: &MatrixTuple, s: &ScalingState) -> Result<MomentValue> {
    check_state_dims(a, s)?;
    let xh = pd_sqrt(&s.x)?;
    let yh = pd_sqrt(&s.y)?;
    let scaled: Vec<ComplexMatrix> = a.matrices().iter().map(|al| xh.mul(al).mul(&yh)).collect();
    moment_map_raw(&scaled)
}

/// One fixed-size geodesic descent step with step `1/l`.
pub fn descent_step(a: &MatrixTuple, s: &ScalingState, l: f64) -> Result<ScalingState> {
    if !(l > 0.0) {
        return Err(Error::InvalidInstance(format!("step constant L = {l}")));
    }
    let mu = transported_gradient(a, s)?;
    let x = geodesic_step(&s.x, &mu.first.scale(-1.0 / l))?;
    let y = geodesic_step(&s.y, &mu.second.scale(-1.0 / l))?;
    Ok(ScalingState { x, y })
}

/// Descent iterate in factored form: `x = sigma† e^{diag p} sigma`,
/// `y = tau† e^{diag q} tau`, with `p`, `q` stored as plain real vectors
/// in internal nonincreasing order. Long divergent runs live in this
/// representation; `p` routinely leaves the range where `e^p` is a float.
#[derive(Clone, Debug)]
pub struct SpectralState {
    pub(crate) sigma: ComplexMatrix,
    pub(crate) p: Vec<f64>,
    pub(crate) tau: ComplexMatrix,
    pub(crate) q: Vec<f64>,
}

impl SpectralState {
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            sigma: ComplexMatrix::identity(n),
            p: vec![0.0; n],
            tau: ComplexMatrix::identity(m),
            q: vec![0.0; m],
        }
    }

    /// Riemannian distance from the identity pair: `|(p, q)|`.
    pub fn distance_from_identity(&self) -> f64 {
        let pp: f64 = self.p.iter().map(|v| v * v).sum();
        let qq: f64 = self.q.iter().map(|v| v * v).sum();
        (pp + qq).sqrt()
    }

    /// Monitor view at iteration `k` with smoothness `l`: `p` nondecreasing,
    /// `q` nonincreasing, and the limit estimate `-(L/k)(p, q)` in the Weyl
    /// chamber.
    pub fn monitor(&self, k: usize, l: f64) -> Result<SpectralMonitor> {
        if k == 0 {
            return Err(Error::InvalidInstance("monitor requires k >= 1".into()));
        }
        let n = self.p.len();
        let p: Vec<f64> = self.p.iter().rev().cloned().collect();
        let sigma = ComplexMatrix::from_fn(n, n, |i, j| self.sigma[(n - 1 - i, j)]);
        let scale = -l / k as f64;
        Ok(SpectralMonitor {
            pstar_estimate: (
                p.iter().map(|v| v * scale).collect(),
                self.q.iter().map(|v| v * scale).collect(),
            ),
            p,
            q: self.q.clone(),
            sigma,
            tau: self.tau.clone(),
        })
    }

    /// Materializes the pair; fails when the log spectrum has left the
    /// range representable by floats.
    pub fn to_scaling_state(&self) -> Result<ScalingState> {
        let spread = |v: &[f64]| v.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if spread(&self.p).max(spread(&self.q)) > 350.0 {
            return Err(Error::SizeCap(
                "log spectrum too spread to materialize".into(),
            ));
        }
        let x = materialize(&self.sigma, &self.p)?;
        let y = materialize(&self.tau, &self.q)?;
        Ok(ScalingState { x, y })
    }
}

fn materialize(basis: &ComplexMatrix, logs: &[f64]) -> Result<PdUnitDetMatrix> {
    let d = ComplexMatrix::from_diag_real(&logs.iter().map(|v| v.exp()).collect::<Vec<_>>());
    let m = basis.adjoint().mul(&d).mul(basis);
    PdUnitDetMatrix::new(HermitianMatrix::project(&m)?)
}

/// Spectral view of an iterate: `x = sigma† e^{diag p} sigma` with `p`
/// nondecreasing, `y = tau† e^{diag q} tau` with `q` nonincreasing, plus
/// the limit estimate `(-L p / k, -L q / k)`, which is nonincreasing /
/// nondecreasing, i.e. lives in the Weyl chamber.
#[derive(Clone, Debug)]
pub struct SpectralMonitor {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub sigma: ComplexMatrix,
    pub tau: ComplexMatrix,
    pub pstar_estimate: (Vec<f64>, Vec<f64>),
}

/// Spectral monitor of a materialized state (see [`SpectralState::monitor`]
/// for the factored variant). Eigendecompositions are taken directly in the
/// output orders, so at the identity the frames are exactly the identity.
pub fn spectral_monitor(s: &ScalingState, k: usize, l: f64) -> Result<SpectralMonitor> {
    if k == 0 {
        return Err(Error::InvalidInstance("monitor requires k >= 1".into()));
    }
    let hx = HermitianMatrix::project(s.x.as_matrix())?;
    let (vx, ux) = herm_eig(&hx, EigOrder::Ascending)?;
    let hy = HermitianMatrix::project(s.y.as_matrix())?;
    let (vy, uy) = herm_eig(&hy, EigOrder::Descending)?;
    if vx[0] <= 0.0 || vy[vy.len() - 1] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            value: vx[0].min(vy[vy.len() - 1]),
        });
    }
    let p: Vec<f64> = vx.iter().map(|v| v.ln()).collect();
    let q: Vec<f64> = vy.iter().map(|v| v.ln()).collect();
    let scale = -l / k as f64;
    Ok(SpectralMonitor {
        pstar_estimate: (
            p.iter().map(|v| v * scale).collect(),
            q.iter().map(|v| v * scale).collect(),
        ),
        p,
        q,
        sigma: ux.adjoint(),
        tau: uy.adjoint(),
    })
}

/// Clusters the Weyl-chamber limit estimate into coarse blocks.
///
/// Consecutive entries of the row estimate within `gap_threshold` merge
/// into row groups, likewise for columns; groups pair up in order (diagonal
/// blocks share a constant value of `p*_i + q*_j`), and the block size
/// ratios `n_a / m_a` must strictly increase.
pub fn extract_coarse_blocks(
    pstar_estimate: &(Vec<f64>, Vec<f64>),
    gap_threshold: f64,
) -> Result<Vec<(usize, usize)>> {
    let (p, q) = pstar_estimate;
    if p.is_empty() || q.is_empty() {
        return Err(Error::InvalidInstance("empty estimate".into()));
    }
    let row_sizes = cluster_sizes(p, gap_threshold, false);
    let col_sizes = cluster_sizes(q, gap_threshold, true);
    if row_sizes.len() != col_sizes.len() {
        return Err(Error::UnresolvedStructure(format!(
            "{} row clusters vs {} column clusters; increase iterations or gap threshold",
            row_sizes.len(),
            col_sizes.len()
        )));
    }
    let blocks: Vec<(usize, usize)> = row_sizes.into_iter().zip(col_sizes).collect();
    for w in blocks.windows(2) {
        let (n1, m1) = w[0];
        let (n2, m2) = w[1];
        if n1 * m2 >= n2 * m1 {
            return Err(Error::UnresolvedStructure(format!(
                "block ratios not strictly increasing: {n1}/{m1} then {n2}/{m2}"
            )));
        }
    }
    Ok(blocks)
}

fn cluster_sizes(values: &[f64], gap: f64, ascending: bool) -> Vec<usize> {
    let mut sizes = vec![1usize];
    for w in values.windows(2) {
        let step = if ascending { w[1] - w[0] } else { w[0] - w[1] };
        if step > gap {
            sizes.push(1);
        } else {
            *sizes.last_mut().unwrap() += 1;
        }
    }
    sizes
}

/// Largest strictly-below-diagonal entry of the rotated tuple
/// `sigma A tau†` under the given block partition; the quantity the descent
/// drives to zero.
///
/// Rows of `sigma` must be ordered so the first block pairs with the
/// largest cluster of the row limit estimate (the [`SpectralMonitor`]
/// convention).
pub fn offdiag_residual(
    a: &MatrixTuple,
    sigma: &ComplexMatrix,
    tau: &ComplexMatrix,
    blocks: &[(usize, usize)],
) -> Result<f64> {
    let n_total: usize = blocks.iter().map(|b| b.0).sum();
    let m_total: usize = blocks.iter().map(|b| b.1).sum();
    if n_total != a.n() || m_total != a.m() {
        return Err(Error::DimensionMismatch(format!(
            "blocks cover {n_total}x{m_total}, tuple is {}x{}",
            a.n(),
            a.m()
        )));
    }
    let tau_adj = tau.adjoint();
    let mut worst = 0.0f64;
    for al in a.matrices() {
        let b = sigma.mul(al).mul(&tau_adj);
        let mut row0 = 0usize;
        for (alpha, &(nb, _)) in blocks.iter().enumerate() {
            let mut col0 = 0usize;
            for &(_, mb) in blocks.iter().take(alpha) {
                for i in row0..row0 + nb {
                    for j in col0..col0 + mb {
                        worst = worst.max(b[(i, j)].norm());
                    }
                }
                col0 += mb;
            }
            row0 += nb;
        }
    }
    Ok(worst)
}

/// Recession value of the scaling objective along the direction `(h, g)`:
/// eigendecompose both, rotate the tuple into the eigenframes, and take the
/// maximum of `p_i + q_j` over entries above `zero_tol * |A|`.
pub fn recession_value(
    a: &MatrixTuple,
    h: &HermitianMatrix,
    g: &HermitianMatrix,
    zero_tol: f64,
) -> Result<f64> {
    if h.dim() != a.n() || g.dim() != a.m() {
        return Err(Error::DimensionMismatch(format!(
            "direction dims ({}, {}) vs tuple {}x{}",
            h.dim(),
            g.dim(),
            a.n(),
            a.m()
        )));
    }
    let (p, uh) = herm_eig(h, EigOrder::Descending)?;
    let (q, ug) = herm_eig(g, EigOrder::Descending)?;
    support_max(a, &uh.adjoint(), &p, &ug.adjoint(), &q, zero_tol)
}

pub(crate) fn support_max(
    a: &MatrixTuple,
    sigma: &ComplexMatrix,
    p: &[f64],
    tau: &ComplexMatrix,
    q: &[f64],
    zero_tol: f64,
) -> Result<f64> {
    let threshold = zero_tol * a.frob_norm();
    let tau_adj = tau.adjoint();
    let mut best = f64::NEG_INFINITY;
    for al in a.matrices() {
        let z = sigma.mul(al).mul(&tau_adj);
        for i in 0..a.n() {
            for j in 0..a.m() {
                if z[(i, j)].norm() > threshold {
                    best = best.max(p[i] + q[j]);
                }
            }
        }
    }
    if best == f64::NEG_INFINITY {
        return Err(Error::Corrupt(
            "no tuple entry above the support tolerance".into(),
        ));
    }
    Ok(best)
}

/// Exactness residual of `b` as a `(p, q)`-scaling at `g = h = I`: the root
/// of `|sum BB† - diag p|^2 + |sum B†B - diag q|^2`.
pub fn check_pq_scaling(b: &MatrixTuple, p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != b.n() || q.len() != b.m() {
        return Err(Error::DimensionMismatch(format!(
            "marginal lengths ({}, {}) vs tuple {}x{}",
            p.len(),
            q.len(),
            b.n(),
            b.m()
        )));
    }
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if (sp - sq).abs() > 1e-9 {
        return Err(Error::InvalidInstance(format!(
            "marginal sums differ: {sp:.12e} vs {sq:.12e}"
        )));
    }
    let mut first = ComplexMatrix::zeros(b.n(), b.n());
    let mut second = ComplexMatrix::zeros(b.m(), b.m());
    for bl in b.matrices() {
        first = first.add(&bl.mul(&bl.adjoint()));
        second = second.add(&bl.adjoint().mul(bl));
    }
    for i in 0..b.n() {
        first[(i, i)] -= C64::new(p[i], 0.0);
    }
    for j in 0..b.m() {
        second[(j, j)] -= C64::new(q[j], 0.0);
    }
    Ok((first.frob_norm_sq() + second.frob_norm_sq()).sqrt())
}

/// Unit-norm scaled tuple in the spectral frame of `s`:
/// `e^{diag p/2} sigma A tau† e^{diag q/2} / |x^{1/2} A y^{1/2}|`.
///
/// A diagnostic object: along divergent runs it approaches diagonalized
/// coarse block forms, which is observed but never asserted.
pub fn normalized_tuple(a: &MatrixTuple, s: &ScalingState) -> Result<MatrixTuple> {
    check_state_dims(a, s)?;
    let mon = spectral_monitor(s, 1, DEFAULT_L_SMOOTH)?;
    let xh = pd_sqrt(&s.x)?;
    let yh = pd_sqrt(&s.y)?;
    let scaled: Vec<ComplexMatrix> = a
        .matrices()
        .iter()
        .map(|al| mon.sigma.mul(&xh.mul(al).mul(&yh)).mul(&mon.tau.adjoint()))
        .collect();
    let norm: f64 = scaled
        .iter()
        .map(ComplexMatrix::frob_norm_sq)
        .sum::<f64>()
        .sqrt();
    if !(norm > 0.0) {
        return Err(Error::InvalidInstance("zero tuple".into()));
    }
    MatrixTuple::new_unchecked(scaled.iter().map(|b| b.scale(1.0 / norm)).collect())
}

/// One logged iterate of a descent run.
#[derive(Clone, Debug)]
pub struct OpTraceEntry {
    pub k: usize,
    pub f_value: f64,
    pub mu_norm: f64,
    /// Log spectrum of `x`, nondecreasing.
    pub p: Vec<f64>,
    /// Log spectrum of `y`, nonincreasing.
    pub q: Vec<f64>,
    pub sigma: ComplexMatrix,
    pub tau: ComplexMatrix,
    pub pstar_estimate: (Vec<f64>, Vec<f64>),
    /// Blocks clustered from the estimate, when resolvable at this iterate.
    pub blocks: Option<Vec<(usize, usize)>>,
    pub offdiag_residual: Option<f64>,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub distance_from_identity: f64,
}

/// Logged history of a descent run plus the final state in factored form.
#[derive(Clone, Debug)]
pub struct OpDescentTrace {
    pub entries: Vec<OpTraceEntry>,
    pub l_smooth: f64,
    pub iters: usize,
    pub final_state: SpectralState,
    /// Final unit-norm scaled tuple in the spectral frame.
    pub final_normalized: MatrixTuple,
    /// Final moment value in the original frame.
    pub final_moment: MomentValue,
}

impl OpDescentTrace {
    pub fn final_entry(&self) -> &OpTraceEntry {
        self.entries.last().expect("trace never empty")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OpDescentOptions {
    pub l_smooth: f64,
    /// Clustering threshold for per-entry block extraction; `None` selects
    /// `max(1e-2, 5 L / k)`.
    pub gap_threshold: Option<f64>,
    pub zero_tol: f64,
}

impl Default for OpDescentOptions {
    fn default() -> Self {
        Self {
            l_smooth: DEFAULT_L_SMOOTH,
            gap_threshold: None,
            zero_tol: DEFAULT_ZERO_TOL,
        }
    }
}

pub fn default_gap_threshold(l: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        (1e-2f64).max(5.0 * l / k as f64)
    }
}

/// Fixed-step geodesic descent from the identity pair, logging every
/// `log_every` iterations (plus the final iterate).
///
/// Both descent inequalities are asserted at every step, and the duality
/// sandwich `lower <= upper` at every logged iterate; violations surface
/// as [`Error::DescentInvariant`].
pub fn run_descent(a: &MatrixTuple, iters: usize, log_every: usize) -> Result<OpDescentTrace> {
    run_descent_with(a, iters, log_every, OpDescentOptions::default())
}

pub fn run_descent_with(
    a: &MatrixTuple,
    iters: usize,
    log_every: usize,
    opts: OpDescentOptions,
) -> Result<OpDescentTrace> {
    engine::run(a, iters, log_every, opts)
}

/// Two-sided certificate from a finished run: `upper` is the final moment
/// norm, `lower` the negative recession value along the divergence
/// direction built from the final spectral frame. Always `lower <= upper`;
/// for unscalable instances the gap closes along the run.
pub fn duality_certificate(a: &MatrixTuple, trace: &OpDescentTrace) -> Result<(f64, f64)> {
    for e in &trace.entries {
        if e.lower_bound > e.upper_bound + 1e-9 {
            return Err(Error::DescentInvariant {
                iter: e.k,
                detail: format!(
                    "duality sandwich violated: lower {:.12e} > upper {:.12e}",
                    e.lower_bound, e.upper_bound
                ),
            });
        }
    }
    let lower = engine::lower_bound_from_spectral(a, &trace.final_state, DEFAULT_ZERO_TOL)?;
    Ok((trace.final_entry().upper_bound, lower))
}
