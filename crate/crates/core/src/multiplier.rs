//! The Lagrange multiplier `λ(r, s) = Σ_k α_k(r) (s − r)^k` and its
//! truncations `λ_N`.
//!
//! The coefficients are polynomials in `r`:
//! `α_0 = 0`, `α_1 = 1`, `α_2 = 0`, `α_k = −(α_{k−3} + r·α_{k−2}) / (k(k−1))`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exact::{horner_f64, Rational, UniPoly};

/// `α_0 … α_{K_λ}` as exact polynomials in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    alphas: Vec<UniPoly>,
}

impl AlphaTable {
    /// Wrap arbitrary polynomials without checking the recursion; lets the
    /// verification checks be exercised against corrupted tables.
    pub fn from_polys(alphas: Vec<UniPoly>) -> Self {
        AlphaTable { alphas }
    }

    /// Highest stored index `K_λ`.
    pub fn order(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn alpha(&self, k: usize) -> &UniPoly {
        &self.alphas[k]
    }

    pub fn alphas(&self) -> &[UniPoly] {
        &self.alphas
    }

    /// Coefficient of `r^j` in `α_k`.
    pub fn alpha_kj(&self, k: usize, j: usize) -> Rational {
        self.alphas[k].coeff(j)
    }
}

pub fn build_alpha_table(order: usize) -> Result<AlphaTable> {
    if order < 2 {
        return Err(Error::Precondition(format!(
            "alpha table order must be ≥ 2, got {order}"
        )));
    }
    let mut alphas = vec![UniPoly::zero(), UniPoly::one(), UniPoly::zero()];
    for k in 3..=order {
        let denom = Rational::from(-((k * (k - 1)) as i64)).recip();
        let next = &alphas[k - 3] + &alphas[k - 2].shift(1);
        alphas.push(next.scale(&denom));
    }
    Ok(AlphaTable { alphas })
}

/// `λ_N(r, s) = Σ_{k=0}^{N} α_k(r)(s − r)^k`.
#[derive(Debug, Clone)]
pub struct LambdaTruncation {
    order: usize,
    table: Arc<AlphaTable>,
}

impl LambdaTruncation {
    pub fn new(order: usize, table: Arc<AlphaTable>) -> Result<Self> {
        if table.order() < order {
            return Err(Error::Precondition(format!(
                "truncation order {order} exceeds alpha table order {}",
                table.order()
            )));
        }
        Ok(LambdaTruncation { order, table })
    }

    /// Build a private table of exactly the needed order.
    pub fn with_order(order: usize) -> Result<Self> {
        let table = build_alpha_table(order.max(2))?;
        LambdaTruncation::new(order, Arc::new(table))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn table(&self) -> &AlphaTable {
        &self.table
    }

    /// Nonzero `(k, j, α_kj)` with `1 ≤ k ≤ N`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        (1..=self.order).flat_map(move |k| {
            self.table
                .alpha(k)
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(move |(j, c)| (k, j, c))
        })
    }

    /// `λ_N(r, s)` in floating point.
    pub fn eval_f64(&self, r: f64, s: f64) -> f64 {
        let at_r: Vec<f64> = (0..=self.order)
            .map(|k| self.table.alpha(k).eval_f64(r))
            .collect();
        horner_f64(&at_r, s - r)
    }
}

/// Coefficients of `λ_{N,ss} + sλ_N` in powers of `(s − r)`, together with
/// the diagonal values `λ_N(r, r)` and `∂_s λ_N(r, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaResidual {
    /// `orders[j]` multiplies `(s − r)^j`, for `j = 0 … N+1`.
    pub orders: Vec<UniPoly>,
    pub diagonal_value: UniPoly,
    pub diagonal_slope: UniPoly,
}

pub fn lambda_ode_residual(trunc: &LambdaTruncation) -> Result<LambdaResidual> {
    let n = trunc.order();
    if n < 2 {
        return Err(Error::Precondition(format!(
            "lambda residual needs N ≥ 2, got {n}"
        )));
    }
    let alpha = |k: isize| -> UniPoly {
        if k < 0 || k as usize > n {
            UniPoly::zero()
        } else {
            trunc.table().alpha(k as usize).clone()
        }
    };
    // s = r + (s − r): order j of sλ_N is r·α_j + α_{j−1}.
    let orders = (0..=n as isize + 1)
        .map(|j| {
            let second = alpha(j + 2).scale(&Rational::from(((j + 2) * (j + 1)) as i64));
            &(&second + &alpha(j).shift(1)) + &alpha(j - 1)
        })
        .collect();
    Ok(LambdaResidual {
        orders,
        diagonal_value: alpha(0),
        diagonal_slope: alpha(1),
    })
}

/// Safety inflation applied to the sampled supremum of `|λ_N|`.
pub const SUP_LAMBDA_SAFETY: f64 = 0.05;

/// `(1 + 0.05) · max |λ_N(r, s)|` over a `grid × grid` lattice restricted to
/// the triangle `0 ≤ s ≤ r ≤ R`.
pub fn sup_lambda_estimate(trunc: &LambdaTruncation, radius: f64, grid: usize) -> Result<f64> {
    if grid < 2 || radius < 0.0 {
        return Err(Error::Precondition(format!(
            "sup_lambda_estimate needs grid ≥ 2 and R ≥ 0 (got grid {grid}, R {radius})"
        )));
    }
    let h = radius / (grid - 1) as f64;
    let alphas: Vec<Vec<f64>> = (0..=trunc.order())
        .map(|k| trunc.table().alpha(k).to_f64_coeffs())
        .collect();
    let mut max = 0.0f64;
    let mut at_r = vec![0.0; alphas.len()];
    for i in 0..grid {
        let r = i as f64 * h;
        for (slot, a) in at_r.iter_mut().zip(&alphas) {
            *slot = horner_f64(a, r);
        }
        for jdx in 0..=i {
            let s = jdx as f64 * h;
            max = max.max(horner_f64(&at_r, s - r).abs());
        }
    }
    Ok(max * (1.0 + SUP_LAMBDA_SAFETY))
}
