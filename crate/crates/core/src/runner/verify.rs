//! The deterministic invariant suite behind `kgvim verify`.
//!
//! Every check takes its inputs explicitly so that corrupted tables can be fed
//! through it and the failure observed.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::airy::{airy_coeffs, residual_check, AirySeries};
use crate::beta::{factorial_table, recursive_table, weighted_integral, BetaSource};
use crate::bounds::{
    choose_mu, comp1_bound_exact, constant_c, error_identity_check, measure_b, ratio_test_check,
    sup_error, theorem1_bound,
};
use crate::engine::{
    airy_prefix_length, coefficient_recursion_check, step_direct_with, step_scatter_with,
    IterateState, Mode,
};
use crate::error::Result;
use crate::exact::{q, Rational, UniPoly};
use crate::multiplier::{
    build_alpha_table, lambda_ode_residual, sup_lambda_estimate, AlphaTable, LambdaTruncation,
};

use super::{DEFAULT_TAIL_TOL, FACTORIAL_BOUND_SLACK, LAMBDA_GRID, ROUNDOFF_FLOOR};

pub const DEFAULT_SEED: u64 = 0x6b67_7669_6d00_0001;

pub const PARTIAL_SUM_ORDERS: [usize; 4] = [3, 4, 5, 6];
pub const MAX_STEPS: usize = 10;
pub const RADII: [f64; 3] = [0.5, 1.0, 2.0];
pub const RANDOM_POLYS: usize = 100;
pub const RANDOM_MAX_DEGREE: usize = 20;

pub const FULL_WORKING_ORDER: usize = 120;
pub const FULL_STEPS: usize = 12;
pub const IDENTITY_WORKING_ORDER: usize = 60;
pub const IDENTITY_STEPS: usize = 5;
pub const IDENTITY_DEGREE: usize = 40;
pub const RATIO_ORDERS: [usize; 2] = [1, 3];
pub const RATIO_D: [f64; 3] = [1.0, 2.0, 5.0];
pub const RATIO_TERMS: usize = 100;

const MAX_DETAILS: usize = 5;

/// Outcome counts of one named invariant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Check {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    /// The first few failures, plus informational notes.
    pub details: Vec<String>,
}

impl Check {
    pub fn new(name: &'static str) -> Self {
        Check {
            name,
            ..Check::default()
        }
    }

    pub fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failed <= MAX_DETAILS {
                self.details.push(what());
            }
        }
    }

    pub fn note(&mut self, text: String) {
        self.details.push(text);
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifySummary {
    pub checks: Vec<Check>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::ok)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.ok() { "PASS" } else { "FAIL" };
            writeln!(
                out,
                "{status} {:<24} {:>6} passed {:>6} failed",
                c.name, c.passed, c.failed
            )
            .unwrap();
            for d in &c.details {
                writeln!(out, "     {d}").unwrap();
            }
        }
        let failed = self.checks.iter().filter(|c| !c.ok()).count();
        writeln!(
            out,
            "{} of {} invariants hold",
            self.checks.len() - failed,
            self.checks.len()
        )
        .unwrap();
        out
    }
}

/// What the suite runs against. The defaults are the production tables.
#[derive(Clone)]
pub struct VerifyInputs {
    pub seed: u64,
    pub table: Arc<AlphaTable>,
    /// Beta source used by the scatter path; the direct path always uses factorials.
    pub scatter_beta: &'static dyn BetaSource,
}

impl VerifyInputs {
    pub fn new(seed: u64) -> Result<Self> {
        Ok(VerifyInputs {
            seed,
            table: Arc::new(build_alpha_table(FULL_WORKING_ORDER + 1)?),
            scatter_beta: recursive_table(),
        })
    }
}

pub fn check_beta(source: &dyn BetaSource, max: usize) -> Check {
    let mut c = Check::new("beta-identities");
    for m in 1..=max {
        for n in 1..=max {
            c.record(source.beta(m, n) == source.beta(n, m), || {
                format!("B({m},{n}) ≠ B({n},{m})")
            });
            let rhs = source.beta(n, m) * Rational::new(n as i64, (m + n) as i64);
            c.record(source.beta(m, n + 1) == rhs, || {
                format!("B({m},{}) recursion", n + 1)
            });
            c.record(source.beta(m, n) == factorial_table().beta(m, n), || {
                format!("B({m},{n}) disagrees with the factorial formula")
            });
        }
    }
    for m in 0..=10 {
        for n in 0..=10 {
            let w = weighted_integral(m, n);
            c.record(
                w.coefficient() == binomial_integral(m, n) && w.power == m + n + 1,
                || format!("weighted integral ({m},{n})"),
            );
        }
    }
    c
}

/// `∫₀¹ (s−1)^m s^n ds` by expanding `(s−1)^m`.
fn binomial_integral(m: usize, n: usize) -> Rational {
    let mut binom = Rational::one();
    let mut total = Rational::zero();
    for i in 0..=m {
        let sign = if (m - i).is_multiple_of(2) { 1 } else { -1 };
        total += &binom * Rational::new(sign, (i + n + 1) as i64);
        binom = binom * Rational::new((m - i) as i64, (i + 1) as i64);
    }
    total
}

pub fn check_alpha_table(table: &AlphaTable) -> Check {
    let mut c = Check::new("alpha-table");
    let head = [UniPoly::zero(), UniPoly::one(), UniPoly::zero()];
    for (k, expected) in head.iter().enumerate() {
        c.record(table.alpha(k) == expected, || {
            format!("α_{k} initial value")
        });
    }
    for k in 3..=table.order() {
        let lhs = table.alpha(k).scale(&Rational::from((k * (k - 1)) as i64));
        let rhs = -(table.alpha(k - 3) + &table.alpha(k - 2).shift(1));
        c.record(lhs == rhs, || format!("α_{k} recursion"));
        c.record(table.alpha(k).degree() <= k as isize, || {
            format!("deg α_{k} > {k}")
        });
    }
    c
}

pub fn check_lambda_ode(table: &Arc<AlphaTable>, orders: &[usize]) -> Result<Check> {
    let mut c = Check::new("lambda-ode-residual");
    for &n in orders {
        let res = lambda_ode_residual(&LambdaTruncation::new(n, table.clone())?)?;
        for j in 0..n - 1 {
            c.record(res.orders[j].is_zero(), || {
                format!("N={n}: residual order {j} nonzero")
            });
        }
        c.record(res.diagonal_value.is_zero(), || {
            format!("N={n}: λ(r,r) ≠ 0")
        });
        c.record(res.diagonal_slope == UniPoly::one(), || {
            format!("N={n}: ∂sλ(r,r) ≠ 1")
        });
    }
    Ok(c)
}

pub fn check_airy(order: usize) -> Result<Check> {
    let mut c = Check::new("airy-residual");
    for k in 3..=order {
        let res = residual_check(&airy_coeffs(k))?;
        c.record(res.is_zero(), || format!("K={k}: residual {res}"));
    }
    Ok(c)
}

/// Seeded random polynomials with small rational coefficients.
pub fn random_polys(seed: u64, count: usize, max_degree: usize) -> Vec<UniPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let degree = rng.gen_range(0..=max_degree);
            UniPoly::from_coeffs(
                (0..=degree)
                    .map(|_| q(rng.gen_range(-20..=20), rng.gen_range(1..=12)))
                    .collect(),
            )
        })
        .collect()
}

/// Partial-sum runs stepped by scatter with the given Beta source, each step
/// compared against the direct path.
pub fn scatter_runs(inputs: &VerifyInputs) -> Result<(Check, Vec<Vec<IterateState>>)> {
    let per_order: Vec<(Check, Vec<IterateState>)> = PARTIAL_SUM_ORDERS
        .par_iter()
        .map(|&n| {
            let lambda = LambdaTruncation::new(n, inputs.table.clone())?;
            let mut c = Check::new("scatter-equals-direct");
            let mut states = vec![IterateState::initial(Mode::PartialSum { n })];
            for _ in 0..MAX_STEPS {
                let prev = states.last().expect("nonempty");
                let next = step_scatter_with(prev, &lambda, inputs.scatter_beta, None)?;
                let direct = step_direct_with(prev, &lambda, factorial_table())?;
                c.record(next.phi == direct.phi, || format!("N={n}, step {}", next.n));
                states.push(next);
            }
            Ok((c, states))
        })
        .collect::<Result<_>>()?;

    let polys = random_polys(inputs.seed, RANDOM_POLYS, RANDOM_MAX_DEGREE);
    let random: Vec<bool> = polys
        .par_iter()
        .enumerate()
        .map(|(i, phi)| {
            let n = PARTIAL_SUM_ORDERS[i % PARTIAL_SUM_ORDERS.len()];
            let lambda = LambdaTruncation::new(n, inputs.table.clone())?;
            let state = IterateState {
                n: 0,
                phi: phi.clone(),
                mode: Mode::PartialSum { n },
            };
            let scatter = step_scatter_with(&state, &lambda, inputs.scatter_beta, None)?;
            let direct = step_direct_with(&state, &lambda, factorial_table())?;
            Ok(scatter.phi == direct.phi)
        })
        .collect::<Result<_>>()?;

    let mut check = Check::new("scatter-equals-direct");
    let mut runs = Vec::new();
    for (c, states) in per_order {
        check.passed += c.passed;
        check.failed += c.failed;
        check.details.extend(c.details);
        runs.push(states);
    }
    for (i, ok) in random.into_iter().enumerate() {
        check.record(ok, || format!("random polynomial #{i}"));
    }
    Ok((check, runs))
}

pub fn check_gather(runs: &[Vec<IterateState>], table: &Arc<AlphaTable>) -> Result<Check> {
    let mut c = Check::new("gather-formula");
    for states in runs {
        let lambda = LambdaTruncation::new(states[0].mode.lambda_order(), table.clone())?;
        for pair in states.windows(2) {
            for m in 2..=pair[1].phi.degree().max(2) as usize {
                let ok = coefficient_recursion_check(&pair[0], &pair[1], &lambda, m)?;
                c.record(ok, || {
                    format!("{:?} step {} coefficient {m}", pair[0].mode, pair[1].n)
                });
            }
        }
    }
    Ok(c)
}

/// Degree growth and Airy prefix on the partial-sum runs.
pub fn check_degree_and_prefix(runs: &[Vec<IterateState>]) -> Result<(Check, Check)> {
    let mut degree = Check::new("degree-bound");
    let mut prefix = Check::new("airy-prefix");
    let max_degree = runs
        .iter()
        .flatten()
        .map(|s| s.phi.degree())
        .max()
        .unwrap_or(0);
    let reference = airy_coeffs(max_degree.max(0) as usize);
    let (mut strong_violations, mut total) = (0, 0);
    for states in runs {
        let Mode::PartialSum { n: order } = states[0].mode else {
            continue;
        };
        for s in states {
            let limit = ((2 * order + 2) * s.n) as isize;
            degree.record(s.phi.degree() <= limit, || {
                format!("N={order}, n={}: degree {} > {limit}", s.n, s.phi.degree())
            });
            let len = airy_prefix_length(s, &reference)?;
            let needed = 2 * s.n as isize + 1;
            prefix.record(len >= needed, || {
                format!("N={order}, n={}: prefix {len} < {needed}", s.n)
            });
            total += 1;
            if len < needed + 1 {
                strong_violations += 1;
            }
        }
    }
    prefix.note(format!(
        "prefix ≥ 2n+2 fails at {strong_violations} of {total} iterates"
    ));
    Ok((degree, prefix))
}

/// Full-multiplier run used by the factorial-bound and error-identity checks.
pub fn full_run(
    table: &Arc<AlphaTable>,
    working_order: usize,
    steps: usize,
) -> Result<Vec<IterateState>> {
    let mode = Mode::FullLambda { working_order };
    let lambda = LambdaTruncation::new(mode.lambda_order(), table.clone())?;
    let mut states = vec![IterateState::initial(mode)];
    for _ in 0..steps {
        let next = step_scatter_with(
            states.last().expect("nonempty"),
            &lambda,
            recursive_table(),
            None,
        )?;
        states.push(next);
    }
    Ok(states)
}

/// Sup errors of a run at radius `R` against the Airy series.
fn sup_errors(states: &[IterateState], radius: f64, grid: usize) -> Result<Vec<f64>> {
    let max_degree = states
        .iter()
        .map(|s| s.phi.degree())
        .max()
        .unwrap_or(0)
        .max(0) as usize;
    let sampled = AirySeries::for_radius(radius, DEFAULT_TAIL_TOL);
    let reference = if sampled.order() >= max_degree {
        sampled
    } else {
        airy_coeffs(max_degree)
    };
    states
        .iter()
        .map(|s| sup_error(&s.phi, &reference, radius, grid, DEFAULT_TAIL_TOL))
        .collect()
}

pub fn check_factorial_bound(
    states: &[IterateState],
    table: &Arc<AlphaTable>,
    radii: &[f64],
    grid: usize,
) -> Result<Check> {
    let mut c = Check::new("factorial-bound");
    let lambda = LambdaTruncation::new(states[0].mode.lambda_order(), table.clone())?;
    for &radius in radii {
        let errors = sup_errors(states, radius, grid)?;
        let m_sup = sup_lambda_estimate(&lambda, radius, LAMBDA_GRID)?;
        for (n, e) in errors.iter().enumerate() {
            let bound = theorem1_bound(n, m_sup, radius, errors[0]);
            c.record(
                *e <= (bound * (1.0 + FACTORIAL_BOUND_SLACK)).max(ROUNDOFF_FLOOR),
                || format!("R={radius}, n={n}: {e:.6e} > {bound:.6e}"),
            );
        }
    }
    Ok(c)
}

pub fn check_error_identity(
    states: &[IterateState],
    table: &Arc<AlphaTable>,
    degree: usize,
) -> Result<Check> {
    let mut c = Check::new("error-identity");
    let Mode::FullLambda { working_order } = states[0].mode else {
        return Ok(c);
    };
    let lambda = LambdaTruncation::new(working_order + 1, table.clone())?;
    let reference = airy_coeffs(working_order);
    for pair in states.windows(2) {
        let ok = error_identity_check(&pair[0], &pair[1], &lambda, &reference, degree)?;
        c.record(ok, || format!("n={}", pair[0].n));
    }
    Ok(c)
}

/// `|a^n_m| ≤ B·C^d/(m−N)˜!` for `m > 2N+2` on partial-sum runs.
pub fn check_coefficient_bound(
    runs: &[Vec<IterateState>],
    table: &AlphaTable,
    steps: usize,
) -> Result<Check> {
    let mut c = Check::new("coefficient-bound");
    for states in runs {
        let Mode::PartialSum { n } = states[0].mode else {
            continue;
        };
        let states = &states[..=steps.min(states.len() - 1)];
        let cc = constant_c(table, n)?;
        let mu = choose_mu(&cc, n);
        let b = measure_b(states, mu)?;
        c.note(format!("N={n}: C={cc}, μ={mu}, B={b}"));
        for s in states {
            for (m, a) in s.phi.coeffs().iter().enumerate().skip(2 * n + 3) {
                let bound = comp1_bound_exact(m, n, &b, &cc)?;
                c.record(a.abs() <= bound, || format!("N={n}, n={}, m={m}", s.n));
            }
        }
    }
    Ok(c)
}

pub fn check_ratio() -> Result<Check> {
    let mut c = Check::new("ratio-test");
    for &n in &RATIO_ORDERS {
        for &d in &RATIO_D {
            let test = ratio_test_check(n, d, RATIO_TERMS)?;
            c.passed += RATIO_TERMS - test.violations.len();
            c.failed += test.violations.len();
            if let Some(&k) = test.violations.first() {
                c.details.push(format!(
                    "N={n}, D={d}: {} of {RATIO_TERMS} ratios exceed D/(k+1), first at k={k}",
                    test.violations.len()
                ));
            }
        }
    }
    Ok(c)
}

/// The whole suite.
pub fn run_suite(inputs: &VerifyInputs) -> Result<VerifySummary> {
    let mut checks = vec![
        check_beta(inputs.scatter_beta, 30),
        check_alpha_table(&inputs.table),
        check_lambda_ode(&inputs.table, &PARTIAL_SUM_ORDERS)?,
        check_airy(200)?,
    ];
    let (scatter, runs) = scatter_runs(inputs)?;
    checks.push(scatter);
    checks.push(check_gather(&runs, &inputs.table)?);
    let (degree, prefix) = check_degree_and_prefix(&runs)?;
    checks.push(degree);
    checks.push(prefix);
    checks.push(check_coefficient_bound(&runs, &inputs.table, MAX_STEPS)?);
    let full = full_run(&inputs.table, FULL_WORKING_ORDER, FULL_STEPS)?;
    checks.push(check_factorial_bound(
        &full,
        &inputs.table,
        &RADII,
        super::DEFAULT_GRID,
    )?);
    let identity = full_run(&inputs.table, IDENTITY_WORKING_ORDER, IDENTITY_STEPS + 1)?;
    checks.push(check_error_identity(
        &identity,
        &inputs.table,
        IDENTITY_DEGREE,
    )?);
    checks.push(check_ratio()?);
    Ok(VerifySummary { checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_polys_are_seeded() {
        let a = random_polys(7, 5, 20);
        assert_eq!(a, random_polys(7, 5, 20));
        assert_ne!(a, random_polys(8, 5, 20));
        assert!(a.iter().all(|p| p.degree() <= 20));
    }

    #[test]
    fn binomial_oracle() {
        assert_eq!(binomial_integral(0, 0), q(1, 1));
        assert_eq!(binomial_integral(1, 0), q(-1, 2));
        assert_eq!(binomial_integral(2, 1), q(1, 12));
    }

    #[test]
    fn flipped_alpha4_breaks_lambda_ode() {
        let good = build_alpha_table(8).unwrap();
        let mut polys = good.alphas().to_vec();
        polys[4] = -&polys[4];
        let bad = Arc::new(AlphaTable::from_polys(polys));
        assert!(check_lambda_ode(&Arc::new(good), &[4, 5]).unwrap().ok());
        let c = check_lambda_ode(&bad, &[4, 5]).unwrap();
        assert!(!c.ok());
        assert!(!check_alpha_table(&bad).ok());
    }

    #[test]
    fn ratio_check_reports_counts() {
        let c = check_ratio().unwrap();
        assert_eq!(
            c.passed + c.failed,
            RATIO_ORDERS.len() * RATIO_D.len() * RATIO_TERMS
        );
    }
}
