//! The variational iteration
//!
//! ```text
//! φ_{n+1}(r) = φ_n(r) + ∫₀^r λ(r, s) (φ_n''(s) + s φ_n(s) + φ_n(s)) ds,   φ_0 = 1
//! ```
//!
//! run either with a fixed truncation `λ_N` ([`Mode::PartialSum`]) or with
//! the full multiplier, computed exactly up to a working degree `K`
//! ([`Mode::FullLambda`]). Order-`k` terms of `λ` only reach output degrees
//! `≥ k + 1`, so a truncation of order `K + 1` leaves every coefficient of
//! degree `≤ K` exact.
//!
//! Two step implementations exist. [`step_scatter`] pushes each monomial
//! `a_m r^m` through the closed-form per-monomial image and is the production
//! path. [`step_direct`] builds the integrand polynomial and integrates it
//! term by term; it shares no code with the scatter path beyond the alpha
//! table and is used as the cross-check.

use serde::{Deserialize, Serialize};

use crate::airy::AirySeries;
use crate::beta::{factorial_table, recursive_table, weighted_integral_with, BetaSource};
use crate::error::{Error, Result};
use crate::exact::{factorial, Rational, UniPoly};
use crate::multiplier::LambdaTruncation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    /// Iterate with `λ_N`.
    PartialSum { n: usize },
    /// Iterate with the full `λ`, keeping coefficients up to degree `working_order`.
    FullLambda { working_order: usize },
}

impl Mode {
    /// Multiplier truncation order the mode needs.
    pub fn lambda_order(&self) -> usize {
        match *self {
            Mode::PartialSum { n } => n,
            Mode::FullLambda { working_order } => working_order + 1,
        }
    }

    fn degree_cap(&self) -> Option<usize> {
        match *self {
            Mode::PartialSum { .. } => None,
            Mode::FullLambda { working_order } => Some(working_order),
        }
    }

    pub fn lambda(&self) -> Result<LambdaTruncation> {
        LambdaTruncation::with_order(self.lambda_order())
    }
}

/// One iterate `φ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub n: usize,
    pub phi: UniPoly,
    pub mode: Mode,
}

impl IterateState {
    /// `φ_0 = 1`.
    pub fn initial(mode: Mode) -> Self {
        IterateState {
            n: 0,
            phi: UniPoly::one(),
            mode,
        }
    }

    fn successor(&self, phi: UniPoly) -> Self {
        IterateState {
            n: self.n + 1,
            phi,
            mode: self.mode,
        }
    }
}

/// A single `a^n_source` → `a^{n+1}_target` contribution of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Contribution {
    pub source: usize,
    pub target: usize,
    pub weight: Rational,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepTrace {
    pub contributions: Vec<Contribution>,
}

impl StepTrace {
    /// `Σ weight · a_source`, grouped by target.
    pub fn replay(&self, prev: &UniPoly) -> UniPoly {
        let len = self
            .contributions
            .iter()
            .map(|c| c.target + 1)
            .max()
            .unwrap_or(0);
        let mut out = vec![Rational::zero(); len];
        for c in &self.contributions {
            out[c.target] += &c.weight * prev.coeff(c.source);
        }
        UniPoly::from_coeffs(out)
    }
}

fn check_lambda(state: &IterateState, lambda: &LambdaTruncation) -> Result<()> {
    match state.mode {
        Mode::PartialSum { n } if lambda.order() != n => Err(Error::Precondition(format!(
            "partial-sum mode N={n} stepped with a truncation of order {}",
            lambda.order()
        ))),
        Mode::FullLambda { working_order } if lambda.order() < working_order + 1 => {
            Err(Error::Precondition(format!(
                "full-lambda mode with working order {working_order} needs truncation order ≥ {}, got {}",
                working_order + 1,
                lambda.order()
            )))
        }
        _ => Ok(()),
    }
}

/// Accumulator that drops anything above the mode's degree cap.
struct Accumulator {
    coeffs: Vec<Rational>,
    cap: Option<usize>,
}

impl Accumulator {
    fn new(cap: Option<usize>) -> Self {
        Accumulator {
            coeffs: Vec::new(),
            cap,
        }
    }

    fn accepts(&self, power: usize) -> bool {
        self.cap.is_none_or(|k| power <= k)
    }

    fn add(&mut self, power: usize, value: Rational) {
        if !self.accepts(power) {
            return;
        }
        if self.coeffs.len() <= power {
            self.coeffs.resize(power + 1, Rational::zero());
        }
        self.coeffs[power] += value;
    }

    fn finish(self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs)
    }
}

/// `φ'' + (s + 1)φ`.
fn integrand(phi: &UniPoly) -> UniPoly {
    &(&phi.derivative().derivative() + &phi.shift(1)) + phi
}

/// One step by integrating the expanded integrand term by term.
pub fn step_direct(state: &IterateState, lambda: &LambdaTruncation) -> Result<IterateState> {
    step_direct_with(state, lambda, factorial_table())
}

pub fn step_direct_with(
    state: &IterateState,
    lambda: &LambdaTruncation,
    beta: &dyn BetaSource,
) -> Result<IterateState> {
    check_lambda(state, lambda)?;
    let cap = state.mode.degree_cap();
    let f = integrand(&state.phi);
    let mut acc = Accumulator::new(cap);
    for (i, c) in state.phi.coeffs().iter().enumerate() {
        acc.add(i, c.clone());
    }
    for (k, j, alpha) in lambda.terms() {
        for (i, fi) in f.coeffs().iter().enumerate() {
            if fi.is_zero() {
                continue;
            }
            let integral = weighted_integral_with(beta, k, i);
            let power = integral.power + j;
            if !acc.accepts(power) {
                break;
            }
            acc.add(power, alpha * fi * integral.coefficient());
        }
    }
    Ok(state.successor(acc.finish()))
}

/// One step through the closed-form image of each monomial.
pub fn step_scatter(state: &IterateState, lambda: &LambdaTruncation) -> Result<IterateState> {
    step_scatter_with(state, lambda, recursive_table(), None)
}

/// One step that also records every contribution.
pub fn step_scatter_traced(
    state: &IterateState,
    lambda: &LambdaTruncation,
) -> Result<(IterateState, StepTrace)> {
    let mut trace = StepTrace::default();
    let next = step_scatter_with(state, lambda, recursive_table(), Some(&mut trace))?;
    Ok((next, trace))
}

/// Image of `r^m` under one step:
///
/// ```text
/// r^m − m(m−1)B(2,m−1) r^m − B(2,m+1) r^{m+2} − B(2,m+2) r^{m+3}
///   + Σ_{k≥3} (−1)^k Σ_j α_kj ( m(m−1)B(k+1,m−1) r^{k+m+j−1}
///                              + B(k+1,m+1) r^{k+m+j+1} + B(k+1,m+2) r^{k+m+j+2} )
/// ```
///
/// using `α_1 = 1` and `α_2 = 0`. For `m ≥ 2` the first two terms cancel;
/// for `m < 2` the second-derivative terms are absent and `r^m` survives.
pub fn step_scatter_with(
    state: &IterateState,
    lambda: &LambdaTruncation,
    beta: &dyn BetaSource,
    mut trace: Option<&mut StepTrace>,
) -> Result<IterateState> {
    check_lambda(state, lambda)?;
    let cap = state.mode.degree_cap();
    let fits = |p: usize| cap.is_none_or(|k| p <= k);
    let mut acc = Accumulator::new(cap);
    let mut emit = |source: usize, target: usize, weight: Rational, a: &Rational| {
        if weight.is_zero() || !acc.accepts(target) {
            return;
        }
        acc.add(target, &weight * a);
        if let Some(t) = trace.as_deref_mut() {
            t.contributions.push(Contribution {
                source,
                target,
                weight,
            });
        }
    };

    let high: Vec<(usize, usize, &Rational)> = lambda.terms().filter(|&(k, _, _)| k >= 3).collect();
    for (m, a) in state.phi.coeffs().iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let curvature = (m * m.saturating_sub(1)) as i64;
        let identity = if m >= 2 {
            Rational::one() - Rational::from(curvature) * beta.beta(2, m - 1)
        } else {
            Rational::one()
        };
        emit(m, m, identity, a);
        if lambda.order() >= 1 {
            emit(m, m + 2, -beta.beta(2, m + 1), a);
            emit(m, m + 3, -beta.beta(2, m + 2), a);
        }
        for &(k, j, alpha) in &high {
            let lowest = if m >= 2 { k + m + j - 1 } else { k + m + j + 1 };
            if !fits(lowest) {
                continue;
            }
            let signed = if k % 2 == 0 { alpha.clone() } else { -alpha };
            if m >= 2 {
                let w = &signed * Rational::from(curvature) * beta.beta(k + 1, m - 1);
                emit(m, k + m + j - 1, w, a);
            }
            emit(m, k + m + j + 1, &signed * beta.beta(k + 1, m + 1), a);
            emit(m, k + m + j + 2, &signed * beta.beta(k + 1, m + 2), a);
        }
    }
    Ok(state.successor(acc.finish()))
}

/// `a^{n+1}_m` from the per-target formula
///
/// ```text
/// −(a_{m−2} + a_{m−3}) / (m(m−1))
///   + Σ_{k=3}^{N} (−1)^k Σ_j α_kj ( a_{p+1} + (a_{p−1} + a_{p−2}) / ((p+1)p) ) · k!/((m−j)⋯(p+2))
/// ```
///
/// with `p = m − j − k` and `a` the coefficients of `prev`.
pub fn gather_coefficient(prev: &UniPoly, lambda: &LambdaTruncation, m: usize) -> Result<Rational> {
    if m < 2 {
        return Err(Error::Precondition(format!(
            "gather formula needs m ≥ 2, got {m}"
        )));
    }
    let a = |i: isize| prev.coeff_signed(i);
    let mi = m as isize;
    let mut total = -(a(mi - 2) + a(mi - 3)) / Rational::from((m * (m - 1)) as i64);
    for (k, j, alpha) in lambda.terms().filter(|&(k, _, _)| k >= 3) {
        let p = mi - j as isize - k as isize;
        // For p ≤ 0 every source index is ≤ 1, where the second-derivative
        // weight m(m−1) vanishes and the other sources have negative index.
        if p <= 0 {
            continue;
        }
        let inner = a(p + 1) + (a(p - 1) + a(p - 2)) / Rational::from(((p + 1) * p) as i64);
        let falling: num_bigint::BigUint = ((p + 2) as u64..=(p + k as isize) as u64).product();
        let weight = Rational::new(factorial(k), falling);
        let term = alpha * inner * weight;
        if k % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total)
}

/// Whether the per-target formula reproduces `next`'s coefficient at `m`.
pub fn coefficient_recursion_check(
    prev: &IterateState,
    next: &IterateState,
    lambda: &LambdaTruncation,
    m: usize,
) -> Result<bool> {
    check_lambda(prev, lambda)?;
    if let Some(k) = prev.mode.degree_cap() {
        if m > k {
            return Err(Error::Precondition(format!(
                "m = {m} beyond working order {k}"
            )));
        }
    }
    Ok(gather_coefficient(&prev.phi, lambda, m)? == next.phi.coeff(m))
}

/// `φ_0 … φ_steps`, each produced by [`step_scatter`]. With `cross_check`
/// every step is repeated through [`step_direct`] and must agree exactly.
pub fn run(
    mode: Mode,
    steps: usize,
    lambda: &LambdaTruncation,
    cross_check: bool,
) -> Result<Vec<IterateState>> {
    if steps == 0 {
        return Err(Error::Precondition("a run needs at least one step".into()));
    }
    let mut states = vec![IterateState::initial(mode)];
    for _ in 0..steps {
        let prev = states.last().expect("nonempty");
        let next = step_scatter(prev, lambda)?;
        if cross_check {
            let direct = step_direct(prev, lambda)?;
            if direct.phi != next.phi {
                return Err(Error::Assertion {
                    invariant: "scatter-equals-direct".into(),
                    detail: format!("step {} → {} differs", prev.n, next.n),
                });
            }
        }
        states.push(next);
    }
    Ok(states)
}

/// Largest `L` with `a^n_m` equal to the reference coefficient for every
/// `m ≤ L`; `-1` when even `a_0` differs.
pub fn airy_prefix_length(state: &IterateState, reference: &AirySeries) -> Result<isize> {
    if (reference.order() as isize) < state.phi.degree() {
        return Err(Error::InsufficientOrder(format!(
            "reference order {} below iterate degree {}",
            reference.order(),
            state.phi.degree()
        )));
    }
    let zero = Rational::zero();
    let matched = reference
        .coeffs()
        .iter()
        .enumerate()
        .take_while(|(m, a)| state.phi.coeff_ref(*m).unwrap_or(&zero) == *a)
        .count();
    Ok(matched as isize - 1)
}
