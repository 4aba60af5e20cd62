//! Reference solution of the reduced problem `φ'' + (r + 1)φ = 0`,
//! `φ(0) = 1`, `φ'(0) = 0`.
//!
//! Its Taylor coefficients satisfy `a_0 = 1`, `a_1 = 0`, `a_2 = −1/2` and
//! `a_k = −(a_{k−3} + a_{k−2}) / (k(k−1))` for `k ≥ 3` (with `a_{−1} = 0`).

use crate::error::{Error, Result};
use crate::exact::{Rational, UniPoly};

/// Exact coefficients `a_0 … a_K` of the reference series.
#[derive(Debug, Clone, PartialEq)]
pub struct AirySeries {
    coeffs: Vec<Rational>,
    floats: Vec<f64>,
}

impl AirySeries {
    /// Wrap arbitrary coefficients without checking the recursion. Used to
    /// exercise [`residual_check`] on corrupted data.
    pub fn from_coeffs_unchecked(coeffs: Vec<Rational>) -> Self {
        let floats = coeffs.iter().map(Rational::to_f64).collect();
        AirySeries { coeffs, floats }
    }

    /// Smallest series whose tail passes the decay test of [`airy_eval`] at
    /// `|r| = radius`.
    pub fn for_radius(radius: f64, tail_tol: f64) -> Self {
        let mut order = 16;
        loop {
            let series = airy_coeffs(order);
            if series.tail_ok(radius.abs(), tail_tol) {
                return series;
            }
            order *= 2;
        }
    }

    /// Highest computed index `K`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Option<&Rational> {
        self.coeffs.get(k)
    }

    /// The partial sum `Σ_{k≤K} a_k r^k` as a polynomial.
    pub fn partial_sum(&self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.clone())
    }

    /// Partial sum truncated at `order` (clamped to the computed order).
    pub fn partial_sum_to(&self, order: usize) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().take(order + 1).cloned().collect())
    }

    /// Exact rational value of the partial sum at `r`.
    pub fn eval_exact(&self, r: &Rational) -> Rational {
        self.partial_sum().eval(r)
    }

    fn term(&self, k: usize, r: f64) -> f64 {
        (self.floats[k] * r.powi(k as i32)).abs()
    }

    /// Last three terms are below `tol` and the last term is smaller than
    /// the one three places back.
    fn tail_ok(&self, r: f64, tol: f64) -> bool {
        let k = self.order();
        if r == 0.0 {
            return true;
        }
        if k < 3 {
            return false;
        }
        let last = self.term(k, r);
        // Both terms may underflow to zero for small r; that still counts as decaying.
        (k - 2..=k).all(|i| self.term(i, r) < tol) && (last == 0.0 || last < self.term(k - 3, r))
    }
}

/// `a_0 … a_K`.
pub fn airy_coeffs(order: usize) -> AirySeries {
    let mut a: Vec<Rational> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let next = match k {
            0 => Rational::one(),
            1 => Rational::zero(),
            2 => Rational::new(-1, 2),
            _ => {
                let lag3 = &a[k - 3];
                let lag2 = &a[k - 2];
                -(lag3 + lag2) / Rational::from((k * (k - 1)) as i64)
            }
        };
        a.push(next);
    }
    AirySeries::from_coeffs_unchecked(a)
}

/// Evaluate `Σ_{k=0}^{K} a_k r^k` in floating point, in index order.
///
/// Fails with [`Error::InsufficientOrder`] unless the last three terms at `r`
/// are below `tail_tol` and the last term is smaller than `|a_{K−3} r^{K−3}|`.
pub fn airy_eval(series: &AirySeries, r: f64, tail_tol: f64) -> Result<f64> {
    if !series.tail_ok(r.abs(), tail_tol) {
        return Err(Error::InsufficientOrder(format!(
            "order {} does not resolve the series at r = {r} to {tail_tol:e}",
            series.order()
        )));
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for a in &series.floats {
        sum += a * power;
        power *= r;
    }
    Ok(sum)
}

/// Largest `|coefficient|` of `φ'' + rφ + φ` over indices `0…K−2`.
pub fn residual_check(series: &AirySeries) -> Result<Rational> {
    let k = series.order();
    if k < 3 {
        return Err(Error::Precondition(format!(
            "residual_check needs order ≥ 3, got {k}"
        )));
    }
    Ok(residual_coeffs(series.coeffs())
        .iter()
        .take(k - 1)
        .map(Rational::abs)
        .max()
        .unwrap_or_default())
}

/// Coefficients of `φ'' + (r + 1)φ` for the truncated series `φ`.
pub fn residual_coeffs(a: &[Rational]) -> Vec<Rational> {
    let zero = Rational::zero();
    let at = |i: isize| {
        if i < 0 {
            &zero
        } else {
            a.get(i as usize).unwrap_or(&zero)
        }
    };
    (0..=a.len() as isize)
        .map(|k| {
            let curvature = Rational::from(((k + 2) * (k + 1)) as i64) * at(k + 2);
            curvature + at(k) + at(k - 1)
        })
        .collect()
}
