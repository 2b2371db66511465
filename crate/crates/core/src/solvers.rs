//! Completion estimators.
//!
//! Both solvers iterate the same fill-and-factor map
//!
//! ```text
//! X_k     = P_Ω Y + P_Ω⊥ Z_k
//! Z_{k+1} = spectral(X_k)
//! ```
//!
//! where `spectral` is singular-value soft-thresholding at `λ`
//! ([`soft_impute`]) or truncation to the leading `q` triplets
//! ([`hard_impute`]). Each step is a majorize–minimize step, so the
//! respective objective never increases.
//!
//! Soft-impute's threshold `λ` minimizes `½‖P_Ω(Y − Z)‖_F² + λ‖Z‖_*`, which
//! is half of [`objective_value`] evaluated at penalty `2λ`. Objective traces
//! of soft-impute runs are recorded on that scale.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{num_err, param_err, Result};
use crate::linalg::{
    fill_missing, project_observed, soft_threshold_spectrum, spectral_norm, thin_svd, DenseMatrix,
    LowRankFactors, ObservationMask,
};

/// Lower end of the λ grid relative to `σ_max(P_Ω Y)`.
pub const LAMBDA_GRID_FLOOR: f64 = 1e-3;

/// Starting point for an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Init {
    #[serde(rename = "ZERO_FILL")]
    ZeroFill,
    /// Every entry set to its column's observed mean.
    #[serde(rename = "COLMEAN_FILL")]
    ColMeanFill,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `‖Z_new − Z_old‖_F / max(‖Z_old‖_F, 1e-12) ≤ tol`.
    pub tol: f64,
    pub max_iters: usize,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iters: 500,
            init: Init::ZeroFill,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(param_err!("tolerance must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return Err(param_err!("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// The regularization a solve used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regularization {
    Lambda(f64),
    Rank(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub z_hat: DenseMatrix,
    pub factors: LowRankFactors,
    pub n_iters: usize,
    pub converged: bool,
    /// Objective at the starting point followed by one value per iteration.
    pub objective_trace: Vec<f64>,
    pub regularization: Regularization,
}

impl SolveResult {
    /// Largest single-step increase along the objective trace (≤ 0 when
    /// the trace is nonincreasing).
    pub fn max_objective_increase(&self) -> f64 {
        self.objective_trace
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
enum Spectral {
    Soft(f64),
    Hard(usize),
}

/// `‖P_Ω(Y − Z)‖_F²`.
fn observed_sse(y: &DenseMatrix, mask: &ObservationMask, z: &DenseMatrix) -> f64 {
    y.data()
        .iter()
        .zip(z.data())
        .zip(mask.as_slice())
        .filter(|(_, &o)| o)
        .map(|((a, b), _)| (a - b) * (a - b))
        .sum()
}

fn nuclear_norm(z: &DenseMatrix) -> Result<f64> {
    if z.data().iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let sv = z
        .as_faer()
        .singular_values()
        .map_err(|e| num_err!("SVD did not converge: {e:?}"))?;
    Ok(sv.iter().map(|s| s.max(0.0)).sum())
}

/// `‖P_Ω Y − P_Ω Z‖_F² + λ‖Z‖_*`.
///
/// With `λ = 0` this is the rank-constrained least-squares objective. Entries
/// of `Y` outside Ω are not read.
pub fn objective_value(
    y: &DenseMatrix,
    mask: &ObservationMask,
    z: &DenseMatrix,
    lambda: f64,
) -> Result<f64> {
    mask.check_matches(y)?;
    mask.check_matches(z)?;
    if !(lambda >= 0.0) {
        return Err(param_err!("penalty must be nonnegative, got {lambda}"));
    }
    let fit = observed_sse(y, mask, z);
    if lambda == 0.0 {
        return Ok(fit);
    }
    if !z.is_finite() {
        return Err(num_err!("objective of a non-finite estimate"));
    }
    Ok(fit + lambda * nuclear_norm(z)?)
}

fn check_inputs(y: &DenseMatrix, mask: &ObservationMask, cfg: &SolverConfig) -> Result<()> {
    mask.check_matches(y)?;
    cfg.validate()?;
    if y.rows() == 0 || y.cols() == 0 {
        return Err(param_err!("cannot complete an empty matrix"));
    }
    if mask.n_observed() == 0 {
        return Err(param_err!("no observed entries"));
    }
    let bad = y
        .data()
        .iter()
        .zip(mask.as_slice())
        .any(|(v, &o)| o && !v.is_finite());
    if bad {
        return Err(num_err!("observed entries must be finite"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(param_err!(
            "lambda must be finite and nonnegative, got {lambda}"
        ));
    }
    Ok(())
}

fn check_rank(y: &DenseMatrix, mask: &ObservationMask, q: usize) -> Result<()> {
    let (m, n) = y.shape();
    if q == 0 || q > m.min(n) {
        return Err(param_err!("rank {q} outside 1..={}", m.min(n)));
    }
    let dof = q * (m + n - q);
    if mask.n_observed() < dof {
        return Err(param_err!(
            "{} observed entries cannot identify a rank-{q} {m}x{n} matrix ({dof} degrees of freedom)",
            mask.n_observed()
        ));
    }
    Ok(())
}

fn initial_estimate(y: &DenseMatrix, mask: &ObservationMask, init: Init) -> DenseMatrix {
    let (m, n) = y.shape();
    match init {
        Init::ZeroFill => DenseMatrix::zeros(m, n),
        Init::ColMeanFill => {
            let mut sums = vec![0.0; n];
            let mut counts = vec![0usize; n];
            for (i, j) in mask.observed_indices() {
                sums[j] += y.get(i, j);
                counts[j] += 1;
            }
            let total: f64 = sums.iter().sum();
            let overall = total / mask.n_observed() as f64;
            let means: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(&s, &c)| if c > 0 { s / c as f64 } else { overall })
                .collect();
            DenseMatrix::from_fn(m, n, |_, j| means[j])
        }
    }
}

fn spectral_update(x: &DenseMatrix, op: Spectral) -> Result<(DenseMatrix, LowRankFactors)> {
    let full = thin_svd(x, None)?;
    let factors = match op {
        Spectral::Soft(lambda) => {
            let shrunk = soft_threshold_spectrum(full.theta(), lambda)?;
            let k = shrunk.iter().take_while(|&&t| t > 0.0).count();
            let kept = full.truncate(k);
            LowRankFactors::from_parts_unchecked(
                kept.u().clone(),
                shrunk[..k].to_vec(),
                kept.v().clone(),
            )
        }
        Spectral::Hard(q) => full.truncate(q),
    };
    Ok((factors.reconstruct(), factors))
}

fn traced_objective(
    y: &DenseMatrix,
    mask: &ObservationMask,
    z: &DenseMatrix,
    op: Spectral,
    nuclear: f64,
) -> f64 {
    let fit = observed_sse(y, mask, z);
    match op {
        Spectral::Soft(lambda) => fit + 2.0 * lambda * nuclear,
        Spectral::Hard(_) => fit,
    }
}

fn iterate(
    y: &DenseMatrix,
    mask: &ObservationMask,
    op: Spectral,
    cfg: &SolverConfig,
    start: DenseMatrix,
) -> Result<SolveResult> {
    let start_nuclear = match op {
        Spectral::Soft(lambda) if lambda > 0.0 => nuclear_norm(&start)?,
        _ => 0.0,
    };
    let mut trace = vec![traced_objective(y, mask, &start, op, start_nuclear)];
    let mut z = start;
    let mut factors = None;
    let mut converged = false;
    let mut n_iters = 0;
    // With nothing missing the filled matrix no longer depends on Z.
    let z_independent = mask.n_missing() == 0;

    for _ in 0..cfg.max_iters {
        n_iters += 1;
        let x = fill_missing(y, mask, &z)?;
        let (z_new, f) = spectral_update(&x, op)?;
        let change = z_new.sub(&z)?.frobenius_norm() / z.frobenius_norm().max(1e-12);
        trace.push(traced_objective(y, mask, &z_new, op, f.nuclear_norm()));
        z = z_new;
        factors = Some(f);
        if change <= cfg.tol || z_independent {
            converged = true;
            break;
        }
    }

    let factors = factors.expect("at least one iteration runs");
    Ok(SolveResult {
        z_hat: z,
        factors,
        n_iters,
        converged,
        objective_trace: trace,
        regularization: match op {
            Spectral::Soft(lambda) => Regularization::Lambda(lambda),
            Spectral::Hard(q) => Regularization::Rank(q),
        },
    })
}

/// Nuclear-norm completion by iterated singular-value soft-thresholding.
///
/// Starts from `cfg.init`. The result minimizes
/// `½‖P_Ω(Y − Z)‖_F² + λ‖Z‖_*` at convergence.
pub fn soft_impute(
    y: &DenseMatrix,
    mask: &ObservationMask,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    check_inputs(y, mask, cfg)?;
    check_lambda(lambda)?;
    let start = initial_estimate(y, mask, cfg.init);
    iterate(y, mask, Spectral::Soft(lambda), cfg, start)
}

/// [`soft_impute`] started from `start` instead of `cfg.init`.
pub fn soft_impute_warm(
    y: &DenseMatrix,
    mask: &ObservationMask,
    lambda: f64,
    cfg: &SolverConfig,
    start: &DenseMatrix,
) -> Result<SolveResult> {
    check_inputs(y, mask, cfg)?;
    check_lambda(lambda)?;
    mask.check_matches(start)?;
    if !start.is_finite() {
        return Err(num_err!("warm start must be finite"));
    }
    iterate(y, mask, Spectral::Soft(lambda), cfg, start.clone())
}

/// Rank-`q` completion by alternating imputation and truncated SVD.
///
/// Finds a local solution of `min_{rank Z = q} ‖P_Ω Y − P_Ω Z‖_F²`; the
/// objective decreases monotonically but global optimality is not claimed.
pub fn hard_impute(
    y: &DenseMatrix,
    mask: &ObservationMask,
    q: usize,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    check_inputs(y, mask, cfg)?;
    check_rank(y, mask, q)?;
    let start = initial_estimate(y, mask, cfg.init);
    iterate(y, mask, Spectral::Hard(q), cfg, start)
}

/// One soft-impute update `S_λ(P_Ω Y + P_Ω⊥ Z)`.
pub fn soft_impute_step(
    y: &DenseMatrix,
    mask: &ObservationMask,
    z: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix> {
    check_lambda(lambda)?;
    let x = fill_missing(y, mask, z)?;
    Ok(spectral_update(&x, Spectral::Soft(lambda))?.0)
}

/// One hard-impute update: rank-`q` truncation of `P_Ω Y + P_Ω⊥ Z`.
pub fn hard_impute_step(
    y: &DenseMatrix,
    mask: &ObservationMask,
    z: &DenseMatrix,
    q: usize,
) -> Result<DenseMatrix> {
    if q == 0 || q > y.rows().min(y.cols()) {
        return Err(param_err!(
            "rank {q} outside 1..={}",
            y.rows().min(y.cols())
        ));
    }
    let x = fill_missing(y, mask, z)?;
    Ok(spectral_update(&x, Spectral::Hard(q))?.0)
}

/// Relative violation of the optimality condition of
/// `½‖P_Ω(Y − Z)‖_F² + λ‖Z‖_*` at `Z = U·diag(θ)·Vᵀ`.
///
/// With `G = P_Ω(Y − Z)` the condition is `G = λ(UVᵀ + W)` with
/// `UᵀW = 0`, `WV = 0`, `‖W‖₂ ≤ 1`. The returned value is
/// `(‖GV − λU‖_F + ‖GᵀU − λV‖_F + max(0, ‖(I − UUᵀ)G(I − VVᵀ)‖₂ − λ)) / ‖P_Ω Y‖_F`.
pub fn stationarity_residual(
    y: &DenseMatrix,
    mask: &ObservationMask,
    factors: &LowRankFactors,
    lambda: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    mask.check_matches(y)?;
    let keep = factors.theta().iter().take_while(|&&t| t > 0.0).count();
    let f = factors.truncate(keep);
    let z = f.reconstruct();
    mask.check_matches(&z)?;
    let g = project_observed(&y.sub(&z)?, mask)?;
    let (u, v) = (f.u(), f.v());

    let gv = g.matmul(v)?;
    let gtu = g.t_matmul(u)?;
    let r_left = gv.sub(&u.scale(lambda))?.frobenius_norm();
    let r_right = gtu.sub(&v.scale(lambda))?.frobenius_norm();

    // (I − UUᵀ) G (I − VVᵀ) = G − U(UᵀG) − (GV)Vᵀ + U(UᵀGV)Vᵀ
    let utg = gtu.transpose();
    let utgv = u.t_matmul(&gv)?;
    let perp = g
        .sub(&u.matmul(&utg)?)?
        .sub(&gv.matmul(&v.transpose())?)?
        .add(&u.matmul(&utgv)?.matmul(&v.transpose())?)?;
    let r_perp = (spectral_norm(&perp)? - lambda).max(0.0);

    let scale = project_observed(y, mask)?.frobenius_norm().max(1e-300);
    Ok((r_left + r_right + r_perp) / scale)
}

/// Grid and hold-out settings for [`select_lambda`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSearch {
    pub grid_size: usize,
    /// Fraction of observed entries hidden for validation, in (0, 0.5].
    pub holdout_frac: f64,
    /// Stop walking down the grid after this many consecutive points fail
    /// to improve the hold-out error. `None` walks the whole grid.
    pub patience: Option<usize>,
    /// Convergence tolerance for the hold-out path fits; `None` uses the
    /// solver config's tolerance. The final refit always uses the config.
    pub path_tol: Option<f64>,
}

impl Default for LambdaSearch {
    fn default() -> Self {
        Self {
            grid_size: 20,
            holdout_frac: 0.1,
            patience: None,
            path_tol: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub best_index: usize,
    /// Full geometric grid, largest first.
    pub grid: Vec<f64>,
    /// Hold-out squared error for every grid point that was fitted.
    pub holdout_errors: Vec<f64>,
    pub path_iters: Vec<usize>,
    /// Refit on all observed entries at the selected λ.
    pub fit: SolveResult,
}

/// Geometric grid from `top` down to `LAMBDA_GRID_FLOOR · top`.
pub fn lambda_grid(top: f64, grid_size: usize) -> Vec<f64> {
    if grid_size == 1 {
        return vec![top];
    }
    let last = (grid_size - 1) as f64;
    (0..grid_size)
        .map(|i| top * LAMBDA_GRID_FLOOR.powf(i as f64 / last))
        .collect()
}

/// Picks λ by hold-out validation along a warm-started soft-impute path.
///
/// A `holdout_frac` share of the observed entries is hidden uniformly at
/// random; soft-impute is fitted on the rest for each grid value, largest
/// first, each fit starting from the previous solution. The λ with the
/// smallest squared error on the hidden entries wins (first on ties), and
/// the model is refitted on every observed entry at that λ.
pub fn select_lambda<R: Rng + ?Sized>(
    y: &DenseMatrix,
    mask: &ObservationMask,
    search: &LambdaSearch,
    cfg: &SolverConfig,
    rng: &mut R,
) -> Result<LambdaSelection> {
    check_inputs(y, mask, cfg)?;
    if !(search.holdout_frac > 0.0 && search.holdout_frac <= 0.5) {
        return Err(param_err!(
            "holdout fraction must lie in (0, 0.5], got {}",
            search.holdout_frac
        ));
    }
    if search.grid_size == 0 {
        return Err(param_err!("grid must have at least one point"));
    }
    if search.patience == Some(0) {
        return Err(param_err!("patience must be at least 1"));
    }
    let n_obs = mask.n_observed();
    if n_obs < 2 {
        return Err(param_err!(
            "need at least two observed entries to hold one out"
        ));
    }
    let path_cfg = SolverConfig {
        tol: search.path_tol.unwrap_or(cfg.tol),
        ..*cfg
    };
    path_cfg.validate()?;

    let observed: Vec<usize> = mask
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .map(|(k, _)| k)
        .collect();
    let n_hold = ((search.holdout_frac * n_obs as f64).round() as usize).clamp(1, n_obs - 1);
    let mut held: Vec<usize> = sample(rng, n_obs, n_hold)
        .into_iter()
        .map(|k| observed[k])
        .collect();
    held.sort_unstable();
    let mut train_flags = mask.as_slice().to_vec();
    for &k in &held {
        train_flags[k] = false;
    }
    let train = ObservationMask::new(y.rows(), y.cols(), train_flags)?;

    let top = spectral_norm(&project_observed(y, mask)?)?;
    let grid = lambda_grid(top, search.grid_size);

    let (m, n) = y.shape();
    let mut warm = DenseMatrix::zeros(m, n);
    let mut best: Option<(usize, f64, DenseMatrix)> = None;
    let mut holdout_errors = Vec::new();
    let mut path_iters = Vec::new();
    let mut stale = 0;
    for (idx, &lambda) in grid.iter().enumerate() {
        let fit = soft_impute_warm(y, &train, lambda, &path_cfg, &warm)?;
        let err: f64 = held
            .iter()
            .map(|&k| {
                let d = y.data()[k] - fit.z_hat.data()[k];
                d * d
            })
            .sum();
        holdout_errors.push(err);
        path_iters.push(fit.n_iters);
        warm = fit.z_hat;
        match &best {
            Some((_, best_err, _)) if err >= *best_err => {
                stale += 1;
                if search.patience.is_some_and(|p| stale >= p) {
                    break;
                }
            }
            _ => {
                best = Some((idx, err, warm.clone()));
                stale = 0;
            }
        }
    }

    let (best_index, _, start) = best.expect("grid is nonempty");
    let lambda = grid[best_index];
    let fit = soft_impute_warm(y, mask, lambda, cfg, &start)?;
    Ok(LambdaSelection {
        lambda,
        best_index,
        grid,
        holdout_errors,
        path_iters,
        fit,
    })
}
