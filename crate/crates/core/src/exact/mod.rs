//! Exact arithmetic substrate: big rationals and dense polynomials in `r`.
//!
//! No floating point is used for any stored value; `to_f64`/`eval_f64` exist
//! only for reporting and sup-norm sampling.

mod poly;
mod rational;

pub use poly::{horner_f64, UniPoly};
pub use rational::{q, ParseRationalError, Rational};

use num_bigint::BigUint;
use num_traits::One;

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}
