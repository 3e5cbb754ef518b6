//! Fixed-step gradient descent for lower-unbounded convex objectives and the
//! structure of their divergence limits.
//!
//! Two concrete settings are implemented on top of a shared dense complex
//! linear-algebra kernel ([`hermlin`]):
//!
//! * [`gp`]: Euclidean log-sum-exp objectives (geometric programming, matrix
//!   scaling). The gradient sequence of the fixed-step descent converges to
//!   the minimum-norm point of the convex hull of the exponent vectors; an
//!   independent minimum-norm oracle certifies it.
//! * [`opscale`]: operator scaling of a complex matrix tuple under the
//!   left-right action, by geodesic descent on pairs of unit-determinant
//!   positive-definite Hermitian matrices. For unscalable tuples the descent
//!   diverges, and the divergence direction carries a simultaneous
//!   block-triangular decomposition of the tuple.
//!
//! The combinatorial limit objects live in [`dm`] (coarse Dulmage-Mendelsohn
//! block structure, minimum-norm reports, brute-force oracle) and [`pencil`]
//! (Kronecker minimal indices of matrix pencils, ground-truth synthesis).

pub mod dm;
pub mod error;
pub mod gp;
pub mod hermlin;
pub mod opscale;
pub mod pencil;
pub mod sampling;

pub use error::{Error, Result};
pub use hermlin::{ComplexMatrix, HermitianMatrix, PdUnitDetMatrix};
