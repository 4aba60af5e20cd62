use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::engine::Mode;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    PartialSum,
    FullLambda,
}

impl std::str::FromStr for ModeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "partial-sum" => Ok(ModeKind::PartialSum),
            "full-lambda" => Ok(ModeKind::FullLambda),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
}

impl std::str::FromStr for Emit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Emit::Csv),
            "json" => Ok(Emit::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

pub const DEFAULT_WORKING_ORDER: usize = 120;
pub const DEFAULT_GRID: usize = 1000;
pub const DEFAULT_TAIL_TOL: f64 = 1e-30;

/// One iteration run. Field names in JSON match the command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ModeKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub steps: usize,
    #[serde(rename = "R")]
    pub r: f64,
    /// Half-width of the sup-norm sampling grid.
    pub grid: usize,
    pub tail_tol: f64,
    pub emit: Emit,
    pub verify: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ModeKind::PartialSum,
            n: 3,
            k: DEFAULT_WORKING_ORDER,
            steps: 10,
            r: 1.0,
            grid: DEFAULT_GRID,
            tail_tol: DEFAULT_TAIL_TOL,
            emit: Emit::Csv,
            verify: false,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn engine_mode(&self) -> Mode {
        match self.mode {
            ModeKind::PartialSum => Mode::PartialSum { n: self.n },
            ModeKind::FullLambda => Mode::FullLambda {
                working_order: self.k,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("steps must be ≥ 1".into()));
        }
        if self.r.is_nan() || self.r <= 0.0 || !self.r.is_finite() {
            return Err(Error::Config(format!(
                "R must be a positive number, got {}",
                self.r
            )));
        }
        if self.grid < 2 {
            return Err(Error::Config(format!(
                "grid must be ≥ 2, got {}",
                self.grid
            )));
        }
        if self.tail_tol.is_nan() || self.tail_tol <= 0.0 {
            return Err(Error::Config(format!(
                "tail-tol must be positive, got {}",
                self.tail_tol
            )));
        }
        match self.mode {
            ModeKind::PartialSum if self.n < 2 => Err(Error::Config(format!(
                "N must be ≥ 2 in partial-sum mode, got {}",
                self.n
            ))),
            ModeKind::FullLambda if self.k < 2 => Err(Error::Config(format!(
                "K must be ≥ 2 in full-lambda mode, got {}",
                self.k
            ))),
            _ => Ok(()),
        }
    }

    /// Non-fatal warnings about the configuration.
    pub fn advisories(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.mode == ModeKind::FullLambda && self.k < 2 * self.steps + 2 {
            out.push(format!(
                "working order K={} is below 2·steps+2={}; late iterates are limited by truncation",
                self.k,
                2 * self.steps + 2
            ));
        }
        out
    }
}

/// A family of partial-sum runs differing only in `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub n_values: Vec<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::Config("sweep needs at least one N value".into()));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!(
                "sweep N values must be ≥ 2, got {n}"
            )));
        }
        self.member(self.n_values[0]).validate()
    }

    pub fn member(&self, n: usize) -> RunConfig {
        RunConfig {
            mode: ModeKind::PartialSum,
            n,
            verify: false,
            ..self.base.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_uses_flag_names() {
        let cfg = RunConfig {
            mode: ModeKind::FullLambda,
            k: 60,
            ..RunConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains(r#""mode":"full-lambda""#) && json.contains(r#""K":60"#));
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let partial: RunConfig = serde_json::from_str(r#"{"N": 5, "steps": 2}"#).unwrap();
        assert_eq!(
            (partial.n, partial.steps, partial.grid),
            (5, 2, DEFAULT_GRID)
        );
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        assert!(RunConfig {
            steps: 0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            r: 0.0,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        assert!(RunConfig {
            n: 1,
            ..RunConfig::default()
        }
        .validate()
        .is_err());
        let sweep = SweepConfig {
            base: RunConfig::default(),
            n_values: vec![],
        };
        assert!(sweep.validate().is_err());
    }

    #[test]
    fn advisory_for_small_working_order() {
        let cfg = RunConfig {
            mode: ModeKind::FullLambda,
            k: 10,
            steps: 12,
            ..RunConfig::default()
        };
        assert_eq!(cfg.advisories().len(), 1);
        assert!(RunConfig::default().advisories().is_empty());
    }
}
