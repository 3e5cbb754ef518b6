//! Log-domain descent engine.
//!
//! The iteration runs on the normalized scaled tuple directly. With group
//! elements `g, h` (never materialized), the scaled tuple is `B = g A h†`
//! and one descent step is
//!
//! ```text
//!   g <- e^{-mu_1(B)/(2L)} g,   h <- e^{-mu_2(B)/(2L)} h,
//! ```
//!
//! which reproduces the geodesic step on `(x, y) = (g†g, h†h)` exactly.
//! Hence the unit tuple `T = B/|B|` obeys the multiplicative recursion
//! `T <- E_1 T E_2 / |...|` with `E_i` the well-conditioned exponential
//! factors, and the moment map needed for the next step comes from `T`
//! alone. Exponentially small entries of `T` decay multiplicatively, so no
//! additive cancellation ever amplifies rounding noise into the dynamics.
//!
//! The spectra and frames are bookkeeping on the side: `g` is carried in
//! factored form `U e^{diag gamma} V†` with `gamma` plain reals. A step
//! multiplies on the left by `E_1`, and one log-graded SVD of
//! `(E_1 U) e^{diag gamma}` restores the factored form. Then
//! `x = g†g = V e^{2 gamma} V†`: the log spectrum is `2 gamma` and the
//! frame is `V†`, accurate regardless of how far the run has diverged.
//! Recentering `gamma` to zero sum keeps determinants exactly one.

use super::{
    default_gap_threshold, extract_coarse_blocks, moment_map_raw, offdiag_residual, support_max,
    MatrixTuple, MomentValue, OpDescentOptions, OpDescentTrace, OpTraceEntry, SpectralState,
};
use crate::error::{Error, Result};
use crate::hermlin::{
    graded_svd_log, herm_eig, orthonormalize_rows, spectral_apply, ComplexMatrix, EigOrder,
    HermitianMatrix,
};

const REORTH_PERIOD: usize = 256;
/// How often sub-precision tuple entries are swept out (see
/// [`EngineState::sweep_noise`]).
const NOISE_SWEEP_PERIOD: usize = 32;
/// Spectral-frame entries at or below this magnitude are rounding noise:
/// their true values are decaying, while the iteration amplifies the noise
/// exponentially if left alone.
const NOISE_FLOOR: f64 = 1e-12;

/// One side of the group element in factored form `U e^{diag gamma} V†`.
struct FactoredSide {
    u: ComplexMatrix,
    gamma: Vec<f64>,
    v: ComplexMatrix,
}

impl FactoredSide {
    fn identity(n: usize) -> Self {
        Self {
            u: ComplexMatrix::identity(n),
            gamma: vec![0.0; n],
            v: ComplexMatrix::identity(n),
        }
    }

    /// `g <- E g` for a well-conditioned Hermitian `E`, then recenter.
    fn premultiply(&mut self, e: &ComplexMatrix) -> Result<()> {
        let lifted = e.mul(&self.u);
        let (s, v_step, u_new) = graded_svd_log(&lifted, &self.gamma)?;
        self.u = u_new;
        self.v = self.v.mul(&v_step);
        self.gamma = s;
        let mean = self.gamma.iter().sum::<f64>() / self.gamma.len() as f64;
        for g in &mut self.gamma {
            *g -= mean;
        }
        Ok(())
    }
}

struct EngineState {
    /// Unit-norm scaled tuple in the ambient frame of `B = g A h†`.
    tuple: Vec<ComplexMatrix>,
    /// Accumulated `log |B|^2`.
    f_value: f64,
    left: FactoredSide,
    right: FactoredSide,
}

impl EngineState {
    fn new(a: &MatrixTuple) -> Self {
        let norm = a.frob_norm();
        Self {
            tuple: a.matrices().iter().map(|m| m.scale(1.0 / norm)).collect(),
            f_value: 2.0 * norm.ln(),
            left: FactoredSide::identity(a.n()),
            right: FactoredSide::identity(a.m()),
        }
    }

    fn spectral(&self) -> SpectralState {
        SpectralState {
            sigma: self.left.v.adjoint(),
            p: self.left.gamma.iter().map(|g| 2.0 * g).collect(),
            tau: self.right.v.adjoint(),
            q: self.right.gamma.iter().map(|g| 2.0 * g).collect(),
        }
    }

    fn step(&mut self, mu: &MomentValue, l: f64) -> Result<()> {
        let e1 = exp_scaled(&mu.first, -1.0 / (2.0 * l))?;
        let e2 = exp_scaled(&mu.second, -1.0 / (2.0 * l))?;
        let mut norm_sq = 0.0;
        let mut next = Vec::with_capacity(self.tuple.len());
        for t in &self.tuple {
            let moved = e1.mul(t).mul(&e2);
            norm_sq += moved.frob_norm_sq();
            next.push(moved);
        }
        if !(norm_sq > 0.0) {
            return Err(Error::Corrupt("scaled tuple vanished".into()));
        }
        let inv = 1.0 / norm_sq.sqrt();
        for t in &mut next {
            *t = t.scale(inv);
        }
        self.tuple = next;
        self.f_value += norm_sq.ln();
        self.left.premultiply(&e1)?;
        self.right.premultiply(&e2)?;
        Ok(())
    }

    /// Zeroes spectral-frame tuple entries at rounding-noise scale.
    ///
    /// Exactly the entries that converge to zero (the off-structure
    /// couplings) pick up additive noise from the ambient-frame products,
    /// and the step inflates that noise exponentially, eventually letting
    /// the iteration balance couplings the instance does not have. Genuine
    /// structure is unaffected: an entry the dynamics feeds is regrown on
    /// the next step, while a decoupled channel stays exactly zero because
    /// products of exact zeros are exact.
    fn sweep_noise(&mut self) {
        let ug = &self.left.u;
        let uh = &self.right.u;
        let ug_adj = ug.adjoint();
        let uh_adj = uh.adjoint();
        let mut norm_sq = 0.0;
        for t in &mut self.tuple {
            let mut spec = ug_adj.mul(t).mul(uh);
            for i in 0..spec.rows() {
                for j in 0..spec.cols() {
                    if spec[(i, j)].norm() <= NOISE_FLOOR {
                        spec[(i, j)] = num_complex::Complex64::new(0.0, 0.0);
                    }
                }
            }
            *t = ug.mul(&spec).mul(&uh_adj);
            norm_sq += t.frob_norm_sq();
        }
        if norm_sq > 0.0 {
            let inv = 1.0 / norm_sq.sqrt();
            for t in &mut self.tuple {
                *t = t.scale(inv);
            }
            self.f_value += norm_sq.ln();
        }
    }
}

fn exp_scaled(h: &HermitianMatrix, factor: f64) -> Result<ComplexMatrix> {
    let (vals, u) = herm_eig(h, EigOrder::Ascending)?;
    Ok(spectral_apply(&vals, &u, |lam| (factor * lam).exp()))
}

pub(super) fn run(
    a: &MatrixTuple,
    iters: usize,
    log_every: usize,
    opts: OpDescentOptions,
) -> Result<OpDescentTrace> {
    if iters == 0 {
        return Err(Error::InvalidInstance("iters must be at least 1".into()));
    }
    if log_every == 0 {
        return Err(Error::InvalidInstance("log_every must be at least 1".into()));
    }
    if !(opts.l_smooth > 0.0) {
        return Err(Error::InvalidInstance(format!(
            "step constant L = {}",
            opts.l_smooth
        )));
    }
    a.validate_kernels()?;

    let l = opts.l_smooth;
    let mut st = EngineState::new(a);
    let mut entries = Vec::new();
    let mut prev: Option<(f64, f64)> = None; // (f_value, grad_norm)

    for k in 0..=iters {
        let mu = moment_map_raw(&st.tuple)?;
        let grad_norm = mu.norm();
        if let Some((f_prev, g_prev)) = prev {
            if st.f_value > f_prev - grad_norm * grad_norm / l + 1e-9 {
                return Err(Error::DescentInvariant {
                    iter: k,
                    detail: format!(
                        "value {:.17e} exceeds {:.17e} - (1/L)|mu'|^2 + 1e-9",
                        st.f_value, f_prev
                    ),
                });
            }
            if grad_norm > g_prev + 1e-10 * g_prev.max(1.0) {
                return Err(Error::DescentInvariant {
                    iter: k,
                    detail: format!("moment norm {grad_norm:.17e} exceeds previous {g_prev:.17e}"),
                });
            }
        }
        prev = Some((st.f_value, grad_norm));

        if k % log_every == 0 || k == iters {
            let entry = log_entry(a, &st, grad_norm, k, &opts)?;
            if entry.lower_bound > entry.upper_bound + 1e-9 {
                return Err(Error::DescentInvariant {
                    iter: k,
                    detail: format!(
                        "duality sandwich violated: lower {:.12e} > upper {:.12e}",
                        entry.lower_bound, entry.upper_bound
                    ),
                });
            }
            entries.push(entry);
        }

        if k == iters {
            let spectral = st.spectral();
            let final_normalized = MatrixTuple::new_unchecked(spectral_frame_tuple(&st))?;
            let final_moment = mu;
            return Ok(OpDescentTrace {
                entries,
                l_smooth: l,
                iters,
                final_state: spectral,
                final_normalized,
                final_moment,
            });
        }

        st.step(&mu, l)?;
        if (k + 1) % NOISE_SWEEP_PERIOD == 0 {
            st.sweep_noise();
        }
        if (k + 1) % REORTH_PERIOD == 0 {
            st.left.v = orthonormalize_rows(&st.left.v.adjoint())?.adjoint();
            st.right.v = orthonormalize_rows(&st.right.v.adjoint())?.adjoint();
        }
    }
    unreachable!("loop returns at k == iters");
}

/// The normalized tuple in the monitor frame `U_g† T U_h`, rows flipped so
/// the first rows pair with the largest limit-estimate cluster.
fn spectral_frame_tuple(st: &EngineState) -> Vec<ComplexMatrix> {
    let n = st.left.u.rows();
    let ug_adj = st.left.u.adjoint();
    st.tuple
        .iter()
        .map(|t| {
            let rotated = ug_adj.mul(t).mul(&st.right.u);
            ComplexMatrix::from_fn(n, rotated.cols(), |i, j| rotated[(n - 1 - i, j)])
        })
        .collect()
}

fn log_entry(
    a: &MatrixTuple,
    st: &EngineState,
    grad_norm: f64,
    k: usize,
    opts: &OpDescentOptions,
) -> Result<OpTraceEntry> {
    let spectral = st.spectral();
    let (p_out, q_out, sigma_out, tau_out, pstar) = if k == 0 {
        (
            vec![0.0; a.n()],
            vec![0.0; a.m()],
            ComplexMatrix::identity(a.n()),
            ComplexMatrix::identity(a.m()),
            (vec![0.0; a.n()], vec![0.0; a.m()]),
        )
    } else {
        let mon = spectral.monitor(k, opts.l_smooth)?;
        (mon.p, mon.q, mon.sigma, mon.tau, mon.pstar_estimate)
    };

    let threshold = opts
        .gap_threshold
        .unwrap_or_else(|| default_gap_threshold(opts.l_smooth, k));
    let blocks = extract_coarse_blocks(&pstar, threshold).ok();
    let offdiag = match &blocks {
        Some(b) => Some(offdiag_residual(a, &sigma_out, &tau_out, b)?),
        None => None,
    };
    let lower = lower_bound_from_spectral(a, &spectral, opts.zero_tol)?;
    Ok(OpTraceEntry {
        k,
        f_value: st.f_value,
        mu_norm: grad_norm,
        p: p_out,
        q: q_out,
        sigma: sigma_out,
        tau: tau_out,
        pstar_estimate: pstar,
        blocks,
        offdiag_residual: offdiag,
        lower_bound: lower,
        upper_bound: grad_norm,
        distance_from_identity: spectral.distance_from_identity(),
    })
}

/// Lower bound of the duality sandwich: the negative recession value along
/// the unit direction `(log x, log y) / |(p, q)|`, zero at the identity.
pub(super) fn lower_bound_from_spectral(
    a: &MatrixTuple,
    st: &SpectralState,
    zero_tol: f64,
) -> Result<f64> {
    let scale = st.distance_from_identity();
    if scale < 1e-300 {
        return Ok(0.0);
    }
    let p: Vec<f64> = st.p.iter().map(|v| v / scale).collect();
    let q: Vec<f64> = st.q.iter().map(|v| v / scale).collect();
    let value = support_max(a, &st.sigma, &p, &st.tau, &q, zero_tol)?;
    Ok(-value)
}
