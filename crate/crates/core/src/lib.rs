//! Exact-arithmetic variational iteration for `φ'' + (r + 1)φ = 0`, `φ(0) = 1`,
//! whose solution is an Airy-type power series.
//!
//! Every iterate is a polynomial with rational coefficients, so the algebraic
//! claims about the scheme (coefficient agreement with the exact series,
//! degree growth, the error recursion) can be checked with equality rather
//! than tolerances. Floating point only appears when measuring sup-norm
//! errors on an interval.

pub mod airy;
pub mod beta;
pub mod bounds;
pub mod engine;
pub mod error;
pub mod exact;
pub mod multiplier;
pub mod runner;

pub use error::{Error, Result};
