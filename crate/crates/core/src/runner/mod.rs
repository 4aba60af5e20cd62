//! Run orchestration and report emission.

mod config;
pub mod verify;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    Emit, ModeKind, RunConfig, SweepConfig, DEFAULT_GRID, DEFAULT_TAIL_TOL, DEFAULT_WORKING_ORDER,
};

use crate::airy::{airy_coeffs, AirySeries};
use crate::bounds::{
    choose_mu, comp1_bound_exact, constant_c, error_identity_check, measure_b, sup_error,
    theorem1_bound, BoundParams, ErrorRecord,
};
use crate::engine::{airy_prefix_length, coefficient_recursion_check, run, IterateState, Mode};
use crate::error::{Error, Result};
use crate::exact::UniPoly;
use crate::multiplier::{build_alpha_table, sup_lambda_estimate, LambdaTruncation};

/// Lattice size used when sampling `sup |λ|` on the triangle.
pub const LAMBDA_GRID: usize = 201;

/// Slack on the factorial bound for sampled quantities.
pub const FACTORIAL_BOUND_SLACK: f64 = 0.05;

/// Sup errors below this are at the level of double-precision evaluation noise.
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

pub const CSV_HEADER: &str = "n,degree,airy_prefix_len,sup_error,theorem1_bound,max_abs_coeff";

/// Result of [`cmd_run`].
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub config: RunConfig,
    pub bounds: BoundParams,
    pub rows: Vec<ErrorRecord>,
    pub final_iterate: UniPoly,
    #[serde(skip)]
    pub states: Vec<IterateState>,
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CSV_HEADER}").unwrap();
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.n,
                row.degree,
                row.airy_prefix_len,
                sci(row.sup_error),
                row.theorem1_bound.map(sci).unwrap_or_default(),
                row.max_abs_coeff
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn render(&self) -> Result<String> {
        match self.config.emit {
            Emit::Csv => Ok(self.to_csv()),
            Emit::Json => self.to_json(),
        }
    }
}

fn assertion(invariant: &str, detail: String) -> Error {
    Error::Assertion {
        invariant: invariant.into(),
        detail,
    }
}

/// Reference series covering both the sampling radius and every iterate degree.
fn reference_for(states: &[IterateState], radius: f64, tail_tol: f64) -> AirySeries {
    let sampled = AirySeries::for_radius(radius, tail_tol);
    let max_degree = states
        .iter()
        .map(|s| s.phi.degree())
        .max()
        .unwrap_or(0)
        .max(0) as usize;
    if sampled.order() >= max_degree {
        sampled
    } else {
        airy_coeffs(max_degree)
    }
}

pub fn cmd_run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let mode = config.engine_mode();
    let lambda = mode.lambda()?;
    let states = run(mode, config.steps, &lambda, config.verify)?;
    let reference = reference_for(&states, config.r, config.tail_tol);

    let e0 = sup_error(
        &states[0].phi,
        &reference,
        config.r,
        config.grid,
        config.tail_tol,
    )?;
    let m_sup = sup_lambda_estimate(&lambda, config.r, LAMBDA_GRID)?;
    let mut bounds = BoundParams {
        n: None,
        c: None,
        b: None,
        mu: None,
        m_sup,
        r: config.r,
        e0,
    };
    if let Mode::PartialSum { n } = mode {
        let c = constant_c(lambda.table(), n)?;
        let mu = choose_mu(&c, n);
        bounds.b = Some(measure_b(&states, mu)?);
        bounds.c = Some(c);
        bounds.mu = Some(mu);
        bounds.n = Some(n);
    }

    let mut rows = Vec::with_capacity(states.len());
    for state in &states {
        let sup = sup_error(
            &state.phi,
            &reference,
            config.r,
            config.grid,
            config.tail_tol,
        )?;
        let theorem1 = match mode {
            Mode::FullLambda { .. } => Some(theorem1_bound(state.n, m_sup, config.r, e0)),
            Mode::PartialSum { .. } => None,
        };
        rows.push(ErrorRecord {
            n: state.n,
            degree: state.phi.degree(),
            airy_prefix_len: airy_prefix_length(state, &reference)?,
            sup_error: sup,
            theorem1_bound: theorem1,
            max_abs_coeff: state.phi.max_abs_coeff(),
        });
    }

    if config.verify {
        verify_run(&states, &rows, &bounds, &lambda)?;
    }

    Ok(RunReport {
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        bounds,
        rows,
        final_iterate: states.last().expect("nonempty").phi.clone(),
        states,
    })
}

fn verify_run(
    states: &[IterateState],
    rows: &[ErrorRecord],
    bounds: &BoundParams,
    lambda: &LambdaTruncation,
) -> Result<()> {
    let mode = states[0].mode;
    for pair in states.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        for m in 2..=next.phi.degree().max(1) as usize {
            if !coefficient_recursion_check(prev, next, lambda, m)? {
                return Err(assertion(
                    "gather-formula",
                    format!("step {} coefficient {m}", next.n),
                ));
            }
        }
        if let Mode::FullLambda { working_order } = mode {
            let exact = airy_coeffs(working_order);
            if !error_identity_check(prev, next, lambda, &exact, working_order)? {
                return Err(assertion("error-identity", format!("step {}", next.n)));
            }
        }
    }
    for (state, row) in states.iter().zip(rows) {
        let n = state.n as isize;
        let cap = match mode {
            Mode::FullLambda { working_order } => working_order as isize,
            Mode::PartialSum { .. } => isize::MAX,
        };
        if row.airy_prefix_len < (2 * n + 1).min(cap) {
            return Err(assertion(
                "airy-prefix",
                format!("n={n}: prefix {} < 2n+1", row.airy_prefix_len),
            ));
        }
        if let Mode::PartialSum { n: order } = mode {
            let limit = ((2 * order + 2) * state.n) as isize;
            if row.degree > limit {
                return Err(assertion(
                    "degree-bound",
                    format!("n={n}: degree {} > {limit}", row.degree),
                ));
            }
            let (b, c) = (bounds.b.as_ref().unwrap(), bounds.c.as_ref().unwrap());
            for (m, a) in state.phi.coeffs().iter().enumerate().skip(2 * order + 3) {
                if a.abs() > comp1_bound_exact(m, order, b, c)? {
                    return Err(assertion("coefficient-bound", format!("n={n}, m={m}")));
                }
            }
        }
    }
    if matches!(mode, Mode::FullLambda { .. }) {
        for row in rows {
            let bound = row
                .theorem1_bound
                .expect("full-lambda rows carry the bound");
            if row.sup_error > (bound * (1.0 + FACTORIAL_BOUND_SLACK)).max(ROUNDOFF_FLOOR) {
                return Err(assertion(
                    "factorial-bound",
                    format!("n={}: {} > {}", row.n, sci(row.sup_error), sci(bound)),
                ));
            }
        }
    }
    Ok(())
}

/// Sup errors of several partial-sum runs side by side.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub n_values: Vec<usize>,
    /// `errors[i][n-1]` is the sup error of the run with `n_values[i]` after `n` steps.
    pub errors: Vec<Vec<f64>>,
    pub steps: usize,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n");
        for n in &self.n_values {
            write!(out, ",sup_error_N{n}").unwrap();
        }
        out.push('\n');
        for step in 1..=self.steps {
            write!(out, "{step}").unwrap();
            for col in &self.errors {
                write!(out, ",{}", sci(col[step])).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn cmd_sweep(config: &SweepConfig) -> Result<SweepReport> {
    config.validate()?;
    let errors = config
        .n_values
        .par_iter()
        .map(|&n| {
            cmd_run(&config.member(n)).map(|r| r.rows.iter().map(|row| row.sup_error).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SweepReport {
        n_values: config.n_values.clone(),
        errors,
        steps: config.base.steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpTarget {
    Alpha,
    Airy,
    Iterate,
}

impl std::str::FromStr for DumpTarget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(DumpTarget::Alpha),
            "airy" => Ok(DumpTarget::Airy),
            "iterate" => Ok(DumpTarget::Iterate),
            other => Err(Error::Config(format!("unknown dump selector {other:?}"))),
        }
    }
}

/// Exact JSON dump. `order` is `K_λ` for `alpha` and `K` for `airy`; the
/// iterate dump follows `config` and allows `steps = 0`.
pub fn cmd_dump(what: DumpTarget, order: usize, config: &RunConfig) -> Result<String> {
    let value = match what {
        DumpTarget::Alpha => serde_json::to_value(build_alpha_table(order)?.alphas())?,
        DumpTarget::Airy => serde_json::to_value(airy_coeffs(order).coeffs())?,
        DumpTarget::Iterate => {
            let mode = config.engine_mode();
            let phi = if config.steps == 0 {
                IterateState::initial(mode).phi
            } else {
                let lambda = mode.lambda()?;
                run(mode, config.steps, &lambda, false)?
                    .pop()
                    .expect("nonempty")
                    .phi
            };
            serde_json::to_value(phi)?
        }
    };
    Ok(serde_json::to_string(&value)? + "\n")
}
