//! The replicated completion experiment.
//!
//! Each replication draws one ground truth and one row-permuted MAR mask
//! together with its MCAR donor. The MCAR arm uses the donor, the MAR arm the
//! permuted mask, so both arms see the same data and the same missing row
//! patterns. NMAR arms draw a logistic mask on the same data.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use lowrank_core::metrics::{
    paired_t_test, relative_error, summarize_cell, welch_t_test, CellMeta, CellSummary, TTest,
};
use lowrank_core::missingness::{
    classify_mechanism, gen_mar_rowperm, gen_nmar_logistic, MechanismKind, MechanismSpec,
};
use lowrank_core::model::sample_gaussian_model;
use lowrank_core::solvers::{hard_impute, select_lambda, soft_impute, Regularization, SolveResult};
use lowrank_core::{DenseMatrix, ObservationMask};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, LambdaPolicy, SolverKind, TestKind};
use crate::error::{BenchError, Result};
use crate::seed::child_seed;

const NMAR_STREAM: u64 = 1;
const SOLVER_STREAM_BASE: u64 = 16;

/// One (rank, proportion, mechanism) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    /// Summary in the headline scope.
    pub summary: CellSummary,
    /// Summaries in the extra scopes, in configuration order.
    pub extra: Vec<CellSummary>,
    pub ignorable: bool,
    pub child_seeds: Vec<u64>,
    /// Checksums of the sampled `Y`; equal across arms of a replication.
    pub truth_checksums: Vec<u64>,
    /// Chosen λ (soft-impute) or rank (hard-impute) per replication.
    pub regularization: Vec<f64>,
    pub iterations: Vec<usize>,
    pub n_converged: usize,
}

/// Two-sample comparison of the first two mechanisms at one (rank, proportion).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rank: usize,
    pub missing_prop: f64,
    pub first: MechanismKind,
    pub second: MechanismKind,
    pub test: TestKind,
    /// `None` when the test is undefined (both samples constant).
    pub result: Option<TTest>,
    /// `|mean_second − mean_first| / mean_first`.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: ExperimentConfig,
    pub version: String,
    pub threads: usize,
    pub wall_clock_secs: f64,
    /// Ordered by rank, then proportion, then mechanism, as configured.
    pub cells: Vec<CellRecord>,
    /// One entry per (rank, proportion) when two or more mechanisms run.
    pub comparisons: Vec<Comparison>,
}

impl BenchReport {
    pub fn cell(
        &self,
        rank: usize,
        missing_prop: f64,
        mechanism: MechanismKind,
    ) -> Option<&CellRecord> {
        self.cells.iter().find(|c| {
            c.summary.rank == rank
                && c.summary.missing_prop == missing_prop
                && c.summary.mechanism == mechanism
        })
    }

    pub fn comparison(&self, rank: usize, missing_prop: f64) -> Option<&Comparison> {
        self.comparisons
            .iter()
            .find(|c| c.rank == rank && c.missing_prop == missing_prop)
    }
}

struct ArmOutcome {
    errors: Vec<f64>,
    regularization: f64,
    iterations: usize,
    converged: bool,
}

struct RepOutcome {
    seed: u64,
    checksum: u64,
    arms: Vec<ArmOutcome>,
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn mechanism_spec(cfg: &ExperimentConfig, mechanism: MechanismKind, p: f64) -> MechanismSpec {
    match mechanism {
        MechanismKind::Mcar => MechanismSpec::mcar(p),
        MechanismKind::MarRowPerm => MechanismSpec::mar_rowperm(p, cfg.anchor_col),
        MechanismKind::NmarLogistic => MechanismSpec::nmar_logistic(logit(p), cfg.nmar_beta),
    }
}

fn solve(
    cfg: &ExperimentConfig,
    y: &DenseMatrix,
    mask: &ObservationMask,
    rank: usize,
    rng: &mut ChaCha8Rng,
) -> lowrank_core::Result<SolveResult> {
    match (cfg.solver, cfg.lambda) {
        (SolverKind::HardImpute, _) => hard_impute(y, mask, rank, &cfg.solver_config),
        (SolverKind::SoftImpute, LambdaPolicy::Fixed { value }) => {
            soft_impute(y, mask, value, &cfg.solver_config)
        }
        (SolverKind::SoftImpute, LambdaPolicy::Select(search)) => {
            Ok(select_lambda(y, mask, &search, &cfg.solver_config, rng)?.fit)
        }
    }
}

fn run_rep(
    cfg: &ExperimentConfig,
    rank_idx: usize,
    prop_idx: usize,
    rep: usize,
) -> Result<RepOutcome> {
    let rank = cfg.ranks[rank_idx];
    let p = cfg.missing_props[prop_idx];
    let seed = child_seed(cfg.master_seed, rank_idx, prop_idx, rep);
    let at = |mechanism: MechanismKind| {
        move |source: lowrank_core::Error| BenchError::Cell {
            rank,
            missing_prop: p,
            mechanism,
            rep,
            source,
        }
    };
    let first = cfg.mechanisms[0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = sample_gaussian_model(cfg.m, cfg.n, rank, cfg.signal_scale, cfg.sigma, &mut rng)
        .map_err(at(first))?;
    // Drawn unconditionally so the data stream does not depend on the mechanism list.
    let mar = gen_mar_rowperm(&truth.y, p, cfg.anchor_col, &mut rng)
        .map_err(at(MechanismKind::MarRowPerm))?;

    let scopes = cfg.scopes();
    let mut arms = Vec::with_capacity(cfg.mechanisms.len());
    for &mechanism in &cfg.mechanisms {
        let nmar;
        let mask = match mechanism {
            MechanismKind::Mcar => &mar.donor,
            MechanismKind::MarRowPerm => &mar.mask,
            MechanismKind::NmarLogistic => {
                let mut nmar_rng = ChaCha8Rng::seed_from_u64(seed);
                nmar_rng.set_stream(NMAR_STREAM);
                nmar = gen_nmar_logistic(&truth.y, logit(p), cfg.nmar_beta, &mut nmar_rng)
                    .map_err(at(mechanism))?;
                &nmar
            }
        };
        let mut solver_rng = ChaCha8Rng::seed_from_u64(seed);
        solver_rng.set_stream(SOLVER_STREAM_BASE + mechanism as u64);
        let fit = solve(cfg, &truth.y, mask, rank, &mut solver_rng).map_err(at(mechanism))?;
        let errors = scopes
            .iter()
            .map(|&scope| relative_error(&truth.z, &fit.z_hat, mask, scope))
            .collect::<lowrank_core::Result<Vec<_>>>()
            .map_err(at(mechanism))?;
        arms.push(ArmOutcome {
            errors,
            regularization: match fit.regularization {
                Regularization::Lambda(l) => l,
                Regularization::Rank(q) => q as f64,
            },
            iterations: fit.n_iters,
            converged: fit.converged,
        });
    }
    Ok(RepOutcome {
        seed,
        checksum: truth.checksum(),
        arms,
    })
}

fn compare(cfg: &ExperimentConfig, a: &CellSummary, b: &CellSummary) -> Comparison {
    let result = match cfg.test {
        TestKind::Welch => welch_t_test(&a.rep_errors, &b.rep_errors),
        TestKind::Paired => paired_t_test(&a.rep_errors, &b.rep_errors),
    }
    .ok();
    Comparison {
        rank: a.rank,
        missing_prop: a.missing_prop,
        first: a.mechanism,
        second: b.mechanism,
        test: cfg.test,
        result,
        relative_gap: (b.mean_rel_err - a.mean_rel_err).abs() / a.mean_rel_err,
    }
}

/// Runs the experiment on `threads` workers.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<BenchReport> {
    run_experiment_with_progress(cfg, threads, |_, _| {})
}

/// As [`run_experiment`], calling `progress(done, total)` after each replication.
///
/// The report does not depend on `threads` apart from the echoed thread
/// count and the wall-clock time.
pub fn run_experiment_with_progress<F>(
    cfg: &ExperimentConfig,
    threads: usize,
    progress: F,
) -> Result<BenchReport>
where
    F: Fn(usize, usize) + Sync,
{
    cfg.validate()?;
    if threads == 0 {
        return Err(BenchError::Config("thread count must be at least 1".into()));
    }
    let start = Instant::now();
    let tasks: Vec<(usize, usize, usize)> = (0..cfg.ranks.len())
        .flat_map(|r| {
            (0..cfg.missing_props.len()).flat_map(move |p| (0..cfg.n_reps).map(move |k| (r, p, k)))
        })
        .collect();
    let total = tasks.len();
    let done = AtomicUsize::new(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<Result<RepOutcome>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(r, p, k)| {
                let out = run_rep(cfg, r, p, k);
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
                out
            })
            .collect()
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let scopes = cfg.scopes();
    let mut cells = Vec::new();
    let mut comparisons = Vec::new();
    for (block, reps) in outcomes.chunks(cfg.n_reps).enumerate() {
        let rank = cfg.ranks[block / cfg.missing_props.len()];
        let missing_prop = cfg.missing_props[block % cfg.missing_props.len()];
        let first_cell = cells.len();
        for (arm, &mechanism) in cfg.mechanisms.iter().enumerate() {
            let mut summaries = scopes.iter().enumerate().map(|(s, &scope)| {
                let errs: Vec<f64> = reps.iter().map(|r| r.arms[arm].errors[s]).collect();
                let meta = CellMeta {
                    mechanism,
                    rank,
                    missing_prop,
                    scope,
                };
                summarize_cell(&errs, meta).expect("n_reps is positive")
            });
            let summary = summaries.next().expect("headline scope");
            cells.push(CellRecord {
                summary,
                extra: summaries.collect(),
                ignorable: classify_mechanism(&mechanism_spec(cfg, mechanism, missing_prop))
                    .is_ignorable(),
                child_seeds: reps.iter().map(|r| r.seed).collect(),
                truth_checksums: reps.iter().map(|r| r.checksum).collect(),
                regularization: reps.iter().map(|r| r.arms[arm].regularization).collect(),
                iterations: reps.iter().map(|r| r.arms[arm].iterations).collect(),
                n_converged: reps.iter().filter(|r| r.arms[arm].converged).count(),
            });
        }
        if cfg.mechanisms.len() >= 2 {
            comparisons.push(compare(
                cfg,
                &cells[first_cell].summary,
                &cells[first_cell + 1].summary,
            ));
        }
    }

    Ok(BenchReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads,
        wall_clock_secs: start.elapsed().as_secs_f64(),
        cells,
        comparisons,
    })
}
