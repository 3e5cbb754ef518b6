//! Euclidean log-sum-exp objectives and their fixed-step gradient descent.
//!
//! An instance is `f(x) = log sum_l a_l exp(omega_l . x)` with positive
//! coefficients. `f` is convex and `L`-smooth with `L = max_l |omega_l|^2`,
//! and its gradient range closes to the convex hull of the exponent vectors.
//! Descent with step `1/L` therefore drives the gradient to the minimum-norm
//! point of that hull, which [`min_norm_oracle`] computes independently by
//! Wolfe's algorithm; divergent trajectories escape at velocity `|p*|/L`.
//!
//! [`matscale_instance`] encodes matrix scaling of a nonnegative matrix as
//! such an objective. The linear row/column terms are folded into the
//! exponent vectors (each becomes `(e_i - 1/n) ⊕ (e_j - 1/m)`), so the
//! gradient is exactly the pair of marginal residuals and the limit objects
//! match the block reports of the `dm` module coordinate-for-coordinate.

mod wolfe;

pub use wolfe::min_norm_oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpTerm {
    pub omega: Vec<f64>,
    pub a: f64,
}

/// Log-sum-exp objective `log sum_l a_l exp(omega_l . x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GpInstance {
    pub n: usize,
    pub terms: Vec<GpTerm>,
}

impl GpInstance {
    pub fn new(n: usize, terms: Vec<GpTerm>) -> Result<Self> {
        let inst = Self { n, terms };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidInstance("no terms".into()));
        }
        for (l, t) in self.terms.iter().enumerate() {
            if t.omega.len() != self.n {
                return Err(Error::DimensionMismatch(format!(
                    "term {l} has {} exponents, instance dim {}",
                    t.omega.len(),
                    self.n
                )));
            }
            if !(t.a > 0.0) || !t.a.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "coefficient of term {l} must be positive, got {}",
                    t.a
                )));
            }
            if t.omega.iter().any(|w| !w.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "non-finite exponent in term {l}"
                )));
            }
        }
        Ok(())
    }

    pub fn exponents(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|t| t.omega.clone()).collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Objective value and gradient, max-shifted so no exponent overflows.
///
/// The gradient is the softmax-weighted average of the exponent vectors;
/// weights are renormalized to sum to exactly one.
pub fn gp_value_grad(inst: &GpInstance, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    if x.len() != inst.n {
        return Err(Error::DimensionMismatch(format!(
            "point dim {} vs instance dim {}",
            x.len(),
            inst.n
        )));
    }
    let logits: Vec<f64> = inst
        .terms
        .iter()
        .map(|t| dot(&t.omega, x) + t.a.ln())
        .collect();
    let shift = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights_raw: Vec<f64> = logits.iter().map(|&s| (s - shift).exp()).collect();
    let total: f64 = weights_raw.iter().sum();
    let value = shift + total.ln();
    let mut grad = vec![0.0; inst.n];
    for (t, w) in inst.terms.iter().zip(&weights_raw) {
        let w = w / total;
        for (g, o) in grad.iter_mut().zip(&t.omega) {
            *g += w * o;
        }
    }
    Ok((value, grad))
}

/// Smoothness constant `max_l |omega_l|^2`.
pub fn gp_smoothness(inst: &GpInstance) -> f64 {
    inst.terms
        .iter()
        .map(|t| dot(&t.omega, &t.omega))
        .fold(0.0, f64::max)
}

/// Recession function (support function of the exponent hull):
/// `max_l omega_l . u`.
pub fn gp_recession(inst: &GpInstance, u: &[f64]) -> f64 {
    inst.terms
        .iter()
        .map(|t| dot(&t.omega, u))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// One record per iterate of a descent run.
#[derive(Clone, Debug)]
pub struct GpTraceEntry {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub grad_norm: f64,
}

/// Full trajectory of a descent run. Objective values and gradient norms
/// are nonincreasing; both are asserted at every step during the run.
#[derive(Clone, Debug)]
pub struct GpTrace {
    pub entries: Vec<GpTraceEntry>,
    pub l_smooth: f64,
}

impl GpTrace {
    pub fn final_entry(&self) -> &GpTraceEntry {
        self.entries.last().expect("trace never empty")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GpDescentOptions {
    pub iters: usize,
    /// Stop early when the relative change of the gradient norm over this
    /// window falls below 1e-12. The iteration budget is the primary
    /// stopping rule; the limits themselves are asymptotic.
    pub stall_window: Option<usize>,
}

/// Fixed-step gradient descent `x <- x - (1/L) grad f(x)` with `L` the
/// instance smoothness.
pub fn gp_descent(inst: &GpInstance, x0: &[f64], iters: usize) -> Result<GpTrace> {
    gp_descent_with_options(
        inst,
        x0,
        GpDescentOptions {
            iters,
            stall_window: None,
        },
    )
}

pub fn gp_descent_with_options(
    inst: &GpInstance,
    x0: &[f64],
    opts: GpDescentOptions,
) -> Result<GpTrace> {
    inst.validate()?;
    let l = gp_smoothness(inst);
    if !(l > 0.0) {
        return Err(Error::InvalidInstance(
            "zero smoothness constant: all exponent vectors vanish".into(),
        ));
    }
    let (value, grad) = gp_value_grad(inst, x0)?;
    let mut entries = vec![GpTraceEntry {
        x: x0.to_vec(),
        value,
        grad_norm: norm(&grad),
        grad,
    }];
    for iter in 0..opts.iters {
        let prev = entries.last().unwrap();
        let x: Vec<f64> = prev
            .x
            .iter()
            .zip(&prev.grad)
            .map(|(xi, gi)| xi - gi / l)
            .collect();
        let (value, grad) = gp_value_grad(inst, &x)?;
        let grad_norm = norm(&grad);
        // Per-step descent inequalities; a violation is a numerics bug.
        if value > prev.value - grad_norm * grad_norm / l + 1e-9 {
            return Err(Error::DescentInvariant {
                iter,
                detail: format!(
                    "value {value:.17e} exceeds {:.17e} - (1/L)|g'|^2 + 1e-9",
                    prev.value
                ),
            });
        }
        if grad_norm > prev.grad_norm + 1e-10 * prev.grad_norm.max(1.0) {
            return Err(Error::DescentInvariant {
                iter,
                detail: format!(
                    "gradient norm {grad_norm:.17e} exceeds previous {:.17e}",
                    prev.grad_norm
                ),
            });
        }
        entries.push(GpTraceEntry {
            x,
            value,
            grad,
            grad_norm,
        });
        if let Some(window) = opts.stall_window {
            let k = entries.len() - 1;
            if k >= window {
                let old = entries[k - window].grad_norm;
                let new = entries[k].grad_norm;
                if (old - new).abs() <= 1e-12 * new.max(1.0) {
                    break;
                }
            }
        }
    }
    Ok(GpTrace {
        entries,
        l_smooth: l,
    })
}

/// Encodes matrix scaling of a nonnegative matrix as a log-sum-exp instance
/// on `R^{n+m}`: one term per positive entry, with exponent vector
/// `(e_i - 1/n) ⊕ (e_j - 1/m)` and coefficient `a_ij`.
///
/// With the shift folded in, the gradient at `(x, y)` is exactly the vector
/// of row and column marginal residuals of the scaled matrix, so descent
/// limits compare directly against block-structure reports.
pub fn matscale_instance(mabs2: &[Vec<f64>]) -> Result<GpInstance> {
    let n = mabs2.len();
    if n == 0 {
        return Err(Error::InvalidInstance("empty matrix".into()));
    }
    let m = mabs2[0].len();
    if m == 0 || mabs2.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInstance("empty or ragged matrix".into()));
    }
    for (i, row) in mabs2.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "entry ({i},{j}) must be finite and nonnegative, got {v}"
                )));
            }
        }
    }
    for (i, row) in mabs2.iter().enumerate() {
        if row.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInstance(format!("zero row {i}")));
        }
    }
    for j in 0..m {
        if mabs2.iter().all(|row| row[j] == 0.0) {
            return Err(Error::InvalidInstance(format!("zero column {j}")));
        }
    }

    let mut terms = Vec::new();
    for (i, row) in mabs2.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let mut omega = vec![-1.0 / n as f64; n];
            omega[i] += 1.0;
            let mut col = vec![-1.0 / m as f64; m];
            col[j] += 1.0;
            omega.extend_from_slice(&col);
            terms.push(GpTerm { omega, a });
        }
    }
    GpInstance::new(n + m, terms)
}

#[cfg(test)]
mod tests;
