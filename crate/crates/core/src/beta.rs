//! Integer Beta function and the weighted monomial integral
//!
//! ```text
//! ∫₀^r (s−r)^m s^n ds = (−1)^m B(m+1, n+1) r^(m+n+1),   B(m,n) = (m−1)!(n−1)!/(m+n−1)!
//! ```
//!
//! Two independent routes to `B` are provided. [`beta`] evaluates the
//! factorial formula; [`BetaTable::recursive`] never touches a factorial and
//! fills values from `B(m,1) = 1/m` and `B(m, n+1) = B(n, m)·n/(m+n)`. The
//! iteration engine uses one route per step implementation so the two step
//! paths cross-check each other.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::exact::{factorial, Rational};

/// `B(m, n) = (m−1)!(n−1)!/(m+n−1)!` for positive integers.
pub fn beta(m: usize, n: usize) -> Result<Rational> {
    if m < 1 || n < 1 {
        return Err(Error::Domain(format!(
            "beta({m}, {n}) needs positive arguments"
        )));
    }
    let num = factorial(m - 1) * factorial(n - 1);
    Ok(Rational::new(num, factorial(m + n - 1)))
}

/// Closed form of `∫₀^r (s−r)^m s^n ds` as `sign · magnitude · r^power`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedIntegral {
    pub sign: i8,
    pub magnitude: Rational,
    pub power: usize,
}

impl WeightedIntegral {
    /// `sign · magnitude`
    pub fn coefficient(&self) -> Rational {
        if self.sign < 0 {
            -&self.magnitude
        } else {
            self.magnitude.clone()
        }
    }
}

pub fn weighted_integral(m: usize, n: usize) -> WeightedIntegral {
    weighted_integral_with(factorial_table(), m, n)
}

pub fn weighted_integral_with(source: &dyn BetaSource, m: usize, n: usize) -> WeightedIntegral {
    WeightedIntegral {
        sign: if m.is_multiple_of(2) { 1 } else { -1 },
        magnitude: source.beta(m + 1, n + 1),
        power: m + n + 1,
    }
}

/// Anything that can produce `B(m, n)` for positive integer arguments.
pub trait BetaSource: Send + Sync {
    fn beta(&self, m: usize, n: usize) -> Rational;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Factorial,
    Recursive,
}

/// Memoized Beta values, safe for concurrent use.
#[derive(Debug)]
pub struct BetaTable {
    route: Route,
    memo: RwLock<HashMap<(usize, usize), Rational>>,
}

impl BetaTable {
    pub fn factorial() -> Self {
        BetaTable {
            route: Route::Factorial,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn recursive() -> Self {
        BetaTable {
            route: Route::Recursive,
            memo: RwLock::new(HashMap::new()),
        }
    }

    fn lookup(&self, key: (usize, usize)) -> Option<Rational> {
        self.memo.read().unwrap().get(&key).cloned()
    }

    fn store(&self, key: (usize, usize), value: Rational) {
        self.memo.write().unwrap().insert(key, value);
    }

    fn compute_recursive(&self, m: usize, n: usize) -> Rational {
        // Walk down to a memoized or base value, then climb back up.
        let mut chain = Vec::new();
        let (mut a, mut b) = (m, n);
        let mut value = loop {
            if let Some(v) = self.lookup((a, b)) {
                break v;
            }
            if b == 1 {
                let v = Rational::new(1, a as i64);
                self.store((a, b), v.clone());
                break v;
            }
            chain.push((a, b));
            (a, b) = (b - 1, a);
        };
        for &(a, b) in chain.iter().rev() {
            let k = b - 1;
            value = value * Rational::new(k as i64, (a + k) as i64);
            self.store((a, b), value.clone());
        }
        value
    }
}

impl BetaSource for BetaTable {
    fn beta(&self, m: usize, n: usize) -> Rational {
        assert!(m >= 1 && n >= 1, "beta({m}, {n}) needs positive arguments");
        if let Some(v) = self.lookup((m, n)) {
            return v;
        }
        match self.route {
            Route::Factorial => {
                let v = beta(m, n).expect("arguments checked");
                self.store((m, n), v.clone());
                v
            }
            Route::Recursive => self.compute_recursive(m, n),
        }
    }
}

/// Shared factorial-route table.
pub fn factorial_table() -> &'static BetaTable {
    static TABLE: OnceLock<BetaTable> = OnceLock::new();
    TABLE.get_or_init(BetaTable::factorial)
}

/// Shared recursion-route table.
pub fn recursive_table() -> &'static BetaTable {
    static TABLE: OnceLock<BetaTable> = OnceLock::new();
    TABLE.get_or_init(BetaTable::recursive)
}
