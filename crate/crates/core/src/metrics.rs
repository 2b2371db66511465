//! Completion error metric, two-sample tests and replication summaries.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Result};
use crate::linalg::{DenseMatrix, ObservationMask};
use crate::missingness::MechanismKind;
use crate::special::student_t_two_sided;

/// Index set over which the relative error is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorScope {
    /// Ω, the observed entries.
    #[serde(rename = "OBSERVED")]
    Observed,
    /// The complement of Ω.
    #[serde(rename = "MISSING")]
    Missing,
    /// Every entry.
    #[serde(rename = "ALL")]
    All,
}

impl ErrorScope {
    pub fn name(self) -> &'static str {
        match self {
            Self::Observed => "OBSERVED",
            Self::Missing => "MISSING",
            Self::All => "ALL",
        }
    }

    #[inline]
    fn includes(self, observed: bool) -> bool {
        match self {
            Self::Observed => observed,
            Self::Missing => !observed,
            Self::All => true,
        }
    }
}

impl std::fmt::Display for ErrorScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ErrorScope {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "OBSERVED" => Ok(Self::Observed),
            "MISSING" => Ok(Self::Missing),
            "ALL" => Ok(Self::All),
            other => Err(param_err!("unknown error scope {other:?}")),
        }
    }
}

/// `100 · Σ_scope (Z_ij − Ẑ_ij)² / ‖Z‖_F²`, in percent.
pub fn relative_error(
    z: &DenseMatrix,
    z_hat: &DenseMatrix,
    mask: &ObservationMask,
    scope: ErrorScope,
) -> Result<f64> {
    if z.shape() != z_hat.shape() {
        return Err(dim_err!(
            "truth is {:?}, estimate is {:?}",
            z.shape(),
            z_hat.shape()
        ));
    }
    mask.check_matches(z)?;
    let denom = z.frobenius_norm_sq();
    if !(denom > 0.0) {
        return Err(param_err!(
            "relative error undefined for a zero truth matrix"
        ));
    }
    let num: f64 = z
        .data()
        .iter()
        .zip(z_hat.data())
        .zip(mask.as_slice())
        .filter(|(_, &o)| scope.includes(o))
        .map(|((a, b), _)| (a - b) * (a - b))
        .sum();
    Ok(100.0 * num / denom)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n − 1` denominator.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Result of a t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

/// Welch's unequal-variance t-test with Welch–Satterthwaite degrees of freedom.
///
/// Needs at least two values per sample and a positive pooled standard error.
pub fn welch_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(param_err!(
            "Welch test needs two values per sample, got {} and {}",
            xs.len(),
            ys.len()
        ));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(param_err!("Welch test samples must be finite"));
    }
    let (nx, ny) = (xs.len() as f64, ys.len() as f64);
    let vx = sample_variance(xs) / nx;
    let vy = sample_variance(ys) / ny;
    let se2 = vx + vy;
    if !(se2 > 0.0) {
        return Err(param_err!("Welch test undefined for two constant samples"));
    }
    let t = (mean(xs) - mean(ys)) / se2.sqrt();
    let df = se2 * se2 / (vx * vx / (nx - 1.0) + vy * vy / (ny - 1.0));
    Ok(TTest {
        t,
        df,
        p_two_sided: student_t_two_sided(t, df),
    })
}

/// Paired t-test on `xs[i] − ys[i]`.
pub fn paired_t_test(xs: &[f64], ys: &[f64]) -> Result<TTest> {
    if xs.len() != ys.len() {
        return Err(dim_err!(
            "paired samples differ in length: {} vs {}",
            xs.len(),
            ys.len()
        ));
    }
    if xs.len() < 2 {
        return Err(param_err!("paired test needs at least two pairs"));
    }
    let d: Vec<f64> = xs.iter().zip(ys).map(|(a, b)| a - b).collect();
    if d.iter().any(|v| !v.is_finite()) {
        return Err(param_err!("paired test samples must be finite"));
    }
    let n = d.len() as f64;
    let se2 = sample_variance(&d) / n;
    if !(se2 > 0.0) {
        return Err(param_err!("paired test undefined for constant differences"));
    }
    let t = mean(&d) / se2.sqrt();
    let df = n - 1.0;
    Ok(TTest {
        t,
        df,
        p_two_sided: student_t_two_sided(t, df),
    })
}

/// Coordinates of one benchmark cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMeta {
    pub mechanism: MechanismKind,
    pub rank: usize,
    pub missing_prop: f64,
    pub scope: ErrorScope,
}

/// Aggregate of the replications in one (mechanism, rank, proportion) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mechanism: MechanismKind,
    pub rank: usize,
    pub missing_prop: f64,
    pub scope: ErrorScope,
    pub n_reps: usize,
    /// Mean relative error, percent.
    pub mean_rel_err: f64,
    /// Sample SD (`n − 1`); reported as 0 when `sd_defined` is false.
    pub sd_rel_err: f64,
    pub sd_defined: bool,
    pub rep_errors: Vec<f64>,
}

pub fn summarize_cell(rep_errors: &[f64], meta: CellMeta) -> Result<CellSummary> {
    if rep_errors.is_empty() {
        return Err(param_err!("cannot summarize a cell with no replications"));
    }
    let n = rep_errors.len();
    let (sd, sd_defined) = if n >= 2 {
        (sample_variance(rep_errors).sqrt(), true)
    } else {
        (0.0, false)
    };
    Ok(CellSummary {
        mechanism: meta.mechanism,
        rank: meta.rank,
        missing_prop: meta.missing_prop,
        scope: meta.scope,
        n_reps: n,
        mean_rel_err: mean(rep_errors),
        sd_rel_err: sd,
        sd_defined,
        rep_errors: rep_errors.to_vec(),
    })
}
