//! Quantitative convergence bounds and sup-norm error measurement.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_eval, AirySeries};
use crate::beta::weighted_integral;
use crate::engine::{IterateState, Mode};
use crate::error::{Error, Result};
use crate::exact::{factorial, horner_f64, Rational, UniPoly};
use crate::multiplier::{AlphaTable, LambdaTruncation};

/// Constants that feed the reported bounds of one run.
///
/// `c`, `b` and `mu` only exist for partial-sum runs; `m_sup` and `e0` feed
/// the factorial bound of full-multiplier runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub n: Option<usize>,
    pub c: Option<Rational>,
    pub b: Option<Rational>,
    pub mu: Option<usize>,
    pub m_sup: f64,
    pub r: f64,
    pub e0: f64,
}

/// Per-iterate convergence record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub n: usize,
    pub degree: isize,
    pub airy_prefix_len: isize,
    pub sup_error: f64,
    pub theorem1_bound: Option<f64>,
    pub max_abs_coeff: Rational,
}

/// Sampled sup norm of `phi − φ` on `2·grid + 1` uniform points of `[−R, R]`.
pub fn sup_error(
    phi: &UniPoly,
    reference: &AirySeries,
    radius: f64,
    grid: usize,
    tail_tol: f64,
) -> Result<f64> {
    if grid < 2 {
        return Err(Error::Precondition(format!(
            "sup_error needs grid ≥ 2, got {grid}"
        )));
    }
    let coeffs = phi.to_f64_coeffs();
    let h = radius / grid as f64;
    let mut worst = 0.0f64;
    for i in 0..=2 * grid {
        let r = -radius + i as f64 * h;
        let diff = horner_f64(&coeffs, r) - airy_eval(reference, r, tail_tol)?;
        worst = worst.max(diff.abs());
    }
    Ok(worst)
}

/// `E0 · (M·R)^n / n!`
pub fn theorem1_bound(n: usize, m_sup: f64, radius: f64, e0: f64) -> f64 {
    let x = m_sup * radius;
    (1..=n).fold(e0, |acc, k| acc * x / k as f64)
}

/// `k˜! = k` for `k ≤ 2N+2`, otherwise `k(k−1)·(k−(2N+2))˜!`.
pub fn funny_factorial(k: usize, n: usize) -> Result<BigUint> {
    if k < 1 {
        return Err(Error::Domain("tilde factorial needs k ≥ 1".into()));
    }
    let period = 2 * n + 2;
    let mut k = k;
    let mut acc = BigUint::one();
    while k > period {
        acc *= (k * (k - 1)) as u64;
        k -= period;
    }
    Ok(acc * k as u64)
}

/// `C = 1 + 2·Σ_{k=3}^{N} k!·Σ_j |α_kj|`.
pub fn constant_c(table: &AlphaTable, n: usize) -> Result<Rational> {
    if n > table.order() {
        return Err(Error::Precondition(format!(
            "constant_c needs N ≤ table order {}, got {n}",
            table.order()
        )));
    }
    let sum: Rational = (3..=n)
        .map(|k| {
            let abs: Rational = table.alpha(k).coeffs().iter().map(Rational::abs).sum();
            abs * Rational::from_biguint(factorial(k))
        })
        .sum();
    Ok(Rational::one() + Rational::from(2) * sum)
}

/// Smallest `m ≥ N + 2` with `C / ((m−N)(m−N−1)) < 1/2`.
pub fn choose_mu(c: &Rational, n: usize) -> usize {
    let half = Rational::new(1, 2);
    (n + 2..)
        .find(|&m| {
            let x = (m - n) as i64;
            c / Rational::from(x * (x - 1)) < half
        })
        .expect("the ratio decreases without bound")
}

/// `B·C^d / (m−N)˜!` with `m = (2N+2)d + ρ`, `ρ ∈ {1, …, 2N+2}`.
pub fn comp1_bound_exact(m: usize, n: usize, b: &Rational, c: &Rational) -> Result<Rational> {
    let period = 2 * n + 2;
    if m <= period {
        return Err(Error::Precondition(format!(
            "coefficient bound needs m > 2N+2 = {period}, got {m}"
        )));
    }
    let d = (m - 1) / period;
    let denom = funny_factorial(m - n, n)?;
    Ok(b * c.pow(d as u32) / Rational::from_biguint(denom))
}

pub fn comp1_bound(m: usize, params: &BoundParams) -> Result<f64> {
    let (Some(n), Some(b), Some(c)) = (params.n, &params.b, &params.c) else {
        return Err(Error::Mode(
            "coefficient bound needs partial-sum parameters".into(),
        ));
    };
    comp1_bound_exact(m, n, b, c).map(|v| v.to_f64())
}

/// Consecutive ratios of `Σ D^k / k˜!` against the claimed bound `D/(k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTest {
    /// `ratios[i]` is term `k+1` over term `k` for `k = i + 1`.
    pub ratios: Vec<f64>,
    pub bounds: Vec<f64>,
    /// Values of `k` where the ratio exceeds the bound (with relative slack 1e−12).
    pub violations: Vec<usize>,
}

impl RatioTest {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const RATIO_SLACK: f64 = 1e-12;

pub fn ratio_test_check(n: usize, d: f64, terms: usize) -> Result<RatioTest> {
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Precondition(format!(
            "ratio test needs D > 0, got {d}"
        )));
    }
    let mut out = RatioTest {
        ratios: Vec::with_capacity(terms),
        bounds: Vec::with_capacity(terms),
        violations: Vec::new(),
    };
    let mut current = funny_factorial(1, n)?;
    for k in 1..=terms {
        let next = funny_factorial(k + 1, n)?;
        let ratio = d * Rational::new(current, next.clone()).to_f64();
        let bound = d / (k + 1) as f64;
        if ratio > bound * (1.0 + RATIO_SLACK) {
            out.violations.push(k);
        }
        out.ratios.push(ratio);
        out.bounds.push(bound);
        current = next;
    }
    Ok(out)
}

/// `max |a^n_m|` over the run for `m ≤ mu`.
pub fn measure_b(run: &[IterateState], mu: usize) -> Result<Rational> {
    if run.is_empty() {
        return Err(Error::Precondition("measure_b needs a nonempty run".into()));
    }
    Ok(run
        .iter()
        .flat_map(|s| s.phi.coeffs().iter().take(mu + 1))
        .map(Rational::abs)
        .max()
        .unwrap_or_default())
}

/// `∫₀^r λ(r, s) e(s) ds`, keeping degrees `≤ max_degree`.
pub fn integrate_against(lambda: &LambdaTruncation, e: &UniPoly, max_degree: usize) -> UniPoly {
    let mut out = vec![Rational::zero(); max_degree + 1];
    for (k, j, alpha) in lambda.terms() {
        for (i, c) in e.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let w = weighted_integral(k, i);
            let power = w.power + j;
            if power > max_degree {
                break;
            }
            out[power] += alpha * c * w.coefficient();
        }
    }
    UniPoly::from_coeffs(out)
}

/// `e_{n+1} = ∫₀^r λ(r, s) e_n(s) ds` coefficient-wise up to `checked_degree`,
/// with `e_n = φ_n − (reference partial sum of the working order)`.
pub fn error_identity_check(
    prev: &IterateState,
    next: &IterateState,
    lambda: &LambdaTruncation,
    reference: &AirySeries,
    checked_degree: usize,
) -> Result<bool> {
    let working_order = match prev.mode {
        Mode::FullLambda { working_order } => working_order,
        Mode::PartialSum { .. } => {
            return Err(Error::Mode(
                "the error identity only holds for the full multiplier".into(),
            ))
        }
    };
    if checked_degree > working_order || reference.order() < working_order {
        return Err(Error::Precondition(format!(
            "checked degree {checked_degree} and reference order {} must bracket working order {working_order}",
            reference.order()
        )));
    }
    let exact = reference.partial_sum_to(working_order);
    let e_prev = &prev.phi - &exact;
    let e_next = (&next.phi - &exact).truncate(checked_degree);
    Ok(integrate_against(lambda, &e_prev, checked_degree) == e_next)
}
