//! Experiment description, loadable from a TOML file.

use std::path::Path;

use lowrank_core::metrics::ErrorScope;
use lowrank_core::missingness::MechanismKind;
use lowrank_core::solvers::{Init, LambdaSearch, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    #[serde(rename = "SOFT_IMPUTE")]
    SoftImpute,
    /// Rank-constrained fit at the true rank of the cell.
    #[serde(rename = "HARD_IMPUTE")]
    HardImpute,
}

impl std::str::FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "soft" | "soft_impute" => Ok(Self::SoftImpute),
            "hard" | "hard_impute" => Ok(Self::HardImpute),
            other => Err(BenchError::Config(format!("unknown solver {other:?}"))),
        }
    }
}

/// How soft-impute's λ is chosen in every replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum LambdaPolicy {
    Fixed { value: f64 },
    Select(LambdaSearch),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Welch,
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Ascii,
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ascii" | "table" => Ok(Self::Ascii),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(BenchError::Config(format!(
                "unknown output format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: usize,
    pub n: usize,
    pub ranks: Vec<usize>,
    pub missing_props: Vec<f64>,
    /// The first two entries are the pair compared by the two-sample test.
    pub mechanisms: Vec<MechanismKind>,
    pub n_reps: usize,
    pub sigma: f64,
    pub signal_scale: f64,
    pub solver: SolverKind,
    pub lambda: LambdaPolicy,
    pub solver_config: SolverConfig,
    /// Scope of the headline table, the CSV and the tests.
    pub error_scope: ErrorScope,
    /// Further scopes summarized alongside the headline.
    pub extra_scopes: Vec<ErrorScope>,
    pub anchor_col: usize,
    /// Logistic slope for NMAR arms; the intercept is `logit(p)`.
    pub nmar_beta: f64,
    pub test: TestKind,
    pub master_seed: u64,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            m: 300,
            n: 300,
            ranks: vec![5, 20],
            missing_props: vec![0.1, 0.3, 0.5, 0.8],
            mechanisms: vec![MechanismKind::Mcar, MechanismKind::MarRowPerm],
            n_reps: 100,
            sigma: 0.05,
            signal_scale: 1.0,
            solver: SolverKind::SoftImpute,
            lambda: LambdaPolicy::Select(LambdaSearch {
                grid_size: 20,
                holdout_frac: 0.1,
                patience: Some(3),
                path_tol: Some(1e-4),
            }),
            solver_config: SolverConfig {
                tol: 1e-5,
                max_iters: 500,
                init: Init::ZeroFill,
            },
            error_scope: ErrorScope::Missing,
            extra_scopes: vec![ErrorScope::Observed],
            anchor_col: 0,
            nmar_beta: 1.0,
            test: TestKind::Welch,
            master_seed: 20_240_601,
            format: OutputFormat::Ascii,
        }
    }
}

fn config_err(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    /// Every scope that gets a summary, headline first.
    pub fn scopes(&self) -> Vec<ErrorScope> {
        let mut out = vec![self.error_scope];
        for &s in &self.extra_scopes {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(config_err("matrix dimensions must be positive"));
        }
        if self.ranks.is_empty() || self.missing_props.is_empty() || self.mechanisms.is_empty() {
            return Err(config_err(
                "ranks, missing_props and mechanisms must be nonempty",
            ));
        }
        let max_rank = self.m.min(self.n);
        if let Some(q) = self.ranks.iter().find(|&&q| q == 0 || q > max_rank) {
            return Err(config_err(format!("rank {q} outside 1..={max_rank}")));
        }
        if let Some(p) = self
            .missing_props
            .iter()
            .find(|p| !(**p > 0.0 && **p < 1.0))
        {
            return Err(config_err(format!("missing proportion {p} outside (0, 1)")));
        }
        for (k, mech) in self.mechanisms.iter().enumerate() {
            if self.mechanisms[..k].contains(mech) {
                return Err(config_err(format!("mechanism {mech} listed twice")));
            }
        }
        if self.n_reps == 0 {
            return Err(config_err("n_reps must be at least 1"));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(config_err(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        if !(self.signal_scale > 0.0) || !self.signal_scale.is_finite() {
            return Err(config_err(format!(
                "signal_scale must be positive, got {}",
                self.signal_scale
            )));
        }
        if self.anchor_col >= self.n {
            return Err(config_err(format!(
                "anchor column {} outside a {}-column matrix",
                self.anchor_col, self.n
            )));
        }
        if !self.nmar_beta.is_finite() {
            return Err(config_err("nmar_beta must be finite"));
        }
        self.solver_config
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        match self.lambda {
            LambdaPolicy::Fixed { value } if !(value >= 0.0) || !value.is_finite() => {
                return Err(config_err(format!(
                    "fixed lambda must be nonnegative, got {value}"
                )));
            }
            LambdaPolicy::Select(s) => {
                if s.grid_size == 0 {
                    return Err(config_err("lambda grid must have at least one point"));
                }
                if !(s.holdout_frac > 0.0 && s.holdout_frac <= 0.5) {
                    return Err(config_err(format!(
                        "holdout_frac must lie in (0, 0.5], got {}",
                        s.holdout_frac
                    )));
                }
                if s.patience == Some(0) {
                    return Err(config_err("patience must be at least 1"));
                }
                if let Some(t) = s.path_tol {
                    if !(t > 0.0) || !t.is_finite() {
                        return Err(config_err(format!("path_tol must be positive, got {t}")));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}
