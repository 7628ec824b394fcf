//! Exact integer and rational linear algebra.
//!
//! Nothing in this crate touches floating point. Integer kernels run on
//! checked machine integers first and redo the work on big integers when a
//! step would overflow.

mod lattice;
mod lp;
mod matrix;
mod num;
mod smith;

pub use lattice::{count_lattice_points, lattice_points, LatticeError};
pub use lp::{feasible, maximize, Constraint, LpOutcome, RationalPolyhedron};
pub use matrix::{IntMatrix, MatrixError};
pub use smith::{smith_normal_form, SmithForm};

pub(crate) use lattice::IntSystem;
pub(crate) use smith::smith_sparse;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Shorthand for an integral rational.
pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Shorthand for a rational `p/q`.
///
/// # Panics
/// Panics if `q == 0`.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
