//! Error type shared across the numeric modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Cyclic Jacobi failed to reduce the off-diagonal mass within the sweep
    /// cap. Carries a condition report for diagnosis.
    #[error(
        "eigensolver did not converge after {sweeps} sweeps \
         (dim {dim}, off-diagonal {offdiag:.3e}, matrix norm {norm:.3e})"
    )]
    EigNonConvergence {
        dim: usize,
        sweeps: usize,
        offdiag: f64,
        norm: f64,
    },

    /// A matrix required to be positive definite has a nonpositive pivot or
    /// eigenvalue.
    #[error("positivity violation: pivot/eigenvalue {value:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A per-iteration descent inequality failed beyond its slack. This
    /// signals a numerics bug, not a property of the instance.
    #[error("descent invariant violated at iteration {iter}: {detail}")]
    DescentInvariant { iter: usize, detail: String },

    #[error("minimum-norm oracle exceeded its cycling guard after {iters} pivots")]
    OracleCycling { iters: usize },

    /// Block clustering failed (cluster counts disagree or the size-ratio law
    /// fails). More iterations or a larger gap threshold may resolve it.
    #[error("unresolved block structure: {0}")]
    UnresolvedStructure(String),

    #[error("invalid block list: {0}")]
    InvalidBlocks(String),

    /// A recovered block shape is not realizable by any pencil.
    #[error("inconsistent block: {0}")]
    InconsistentBlock(String),

    /// An internally impossible numeric state (nonpositive trace norm, total
    /// support loss); indicates corrupted inputs or a bug.
    #[error("numerical corruption: {0}")]
    Corrupt(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;
