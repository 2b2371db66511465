//! Acceptance checks, one test per criterion.
//!
//! Every test writes a single `ACCEPTANCE <id> <name>: PASS|FAIL (...)` line
//! to stderr (uncaptured) before asserting. Criteria 1, 2 and 8 share a
//! 30-replication run of the default 300x300 benchmark, which takes on the
//! order of an hour per run on one core.

use std::io::Write;
use std::sync::OnceLock;

use lowrank_bench::render::render_csv;
use lowrank_bench::{run_experiment, BenchReport, ExperimentConfig};
use lowrank_core::linalg::{project_observed, soft_threshold_spectrum, spectral_norm, thin_svd};
use lowrank_core::metrics::welch_t_test;
use lowrank_core::missingness::{gen_mar_rowperm, gen_mcar, mask_stats, MechanismKind};
use lowrank_core::model::sample_gaussian_model;
use lowrank_core::solvers::{hard_impute, soft_impute, SolverConfig};
use lowrank_core::{DenseMatrix, LowRankFactors, ObservationMask};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};

const SCALED_REPS: usize = 30;

fn verdict(id: u32, name: &str, pass: bool, detail: String) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr().lock(),
        "ACCEPTANCE {id} {name}: {status} ({detail})"
    );
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn scaled_default() -> ExperimentConfig {
    ExperimentConfig {
        n_reps: SCALED_REPS,
        ..ExperimentConfig::default()
    }
}

/// The scaled default run on a single worker, shared by criteria 1, 2 and 8.
fn shared_run() -> &'static BenchReport {
    static REPORT: OnceLock<BenchReport> = OnceLock::new();
    REPORT.get_or_init(|| run_experiment(&scaled_default(), 1).expect("default benchmark runs"))
}

fn rel_frobenius(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let diff = a.sub(b).unwrap().frobenius_norm();
    let scale = b.frobenius_norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

#[test]
fn criterion_1_mcar_and_mar_errors_agree() {
    let report = shared_run();
    let cfg = &report.config;
    let mut good = 0;
    let mut notes = Vec::new();
    for &rank in &cfg.ranks {
        for &p in &cfg.missing_props {
            let cmp = report.comparison(rank, p).expect("comparison per cell");
            let pv = cmp.result.map_or(f64::NAN, |t| t.p_two_sided);
            let ok = pv > 0.05 && cmp.relative_gap < 0.05;
            good += usize::from(ok);
            notes.push(format!(
                "r{rank}/{p}: p={pv:.3} gap={:.3}",
                cmp.relative_gap
            ));
        }
    }
    let total = cfg.ranks.len() * cfg.missing_props.len();
    verdict(
        1,
        "MCAR and MAR equivalence",
        good >= 7,
        format!("{good}/{total} cells agree; {}", notes.join(", ")),
    );
}

#[test]
fn criterion_2_error_rows_follow_table_trend() {
    let report = shared_run();
    let cfg = &report.config;
    let mut failures = Vec::new();
    for &rank in &cfg.ranks {
        for &mech in &cfg.mechanisms {
            let row: Vec<f64> = cfg
                .missing_props
                .iter()
                .map(|&p| report.cell(rank, p, mech).unwrap().summary.mean_rel_err)
                .collect();
            if !row.windows(2).all(|w| w[0] < w[1]) {
                failures.push(format!(
                    "rank {rank} {} not increasing: {row:?}",
                    mech.label()
                ));
            }
        }
    }
    let (lo, hi) = (cfg.ranks[0], cfg.ranks[cfg.ranks.len() - 1]);
    for &mech in &cfg.mechanisms {
        for &p in &cfg.missing_props {
            let a = report.cell(lo, p, mech).unwrap().summary.mean_rel_err;
            let b = report.cell(hi, p, mech).unwrap().summary.mean_rel_err;
            if b <= a {
                failures.push(format!(
                    "{} at {p}: rank {hi} {b} <= rank {lo} {a}",
                    mech.label()
                ));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!(
            "{} rows increasing, higher rank worse at every proportion",
            cfg.ranks.len() * cfg.mechanisms.len()
        )
    } else {
        failures.join("; ")
    };
    verdict(
        2,
        "error grows with missingness and rank",
        failures.is_empty(),
        detail,
    );
}

#[test]
fn criterion_3_soft_impute_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let all = ObservationMask::all_observed(30, 30);
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let y = DenseMatrix::standard_normal(30, 30, &mut rng);
        let f = thin_svd(&y, None).unwrap();
        let top = f.theta()[0];
        for frac in [0.0, 0.05, 0.2, 0.6, 1.1] {
            let lambda = frac * top;
            let fit = soft_impute(&y, &all, lambda, &cfg).unwrap();
            let shrunk = soft_threshold_spectrum(f.theta(), lambda).unwrap();
            let oracle = LowRankFactors::new(f.u().clone(), shrunk, f.v().clone())
                .unwrap()
                .reconstruct();
            worst = worst.max(rel_frobenius(&fit.z_hat, &oracle));
        }
    }
    verdict(
        3,
        "closed-form soft-thresholding oracle",
        worst <= 1e-8,
        format!("250 fits, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_4_full_data_hard_impute_is_truncated_svd() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let all = ObservationMask::all_observed(25, 18);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let q = 1 + k % 5;
        let y = DenseMatrix::standard_normal(25, 18, &mut rng);
        let fit = hard_impute(&y, &all, q, &SolverConfig::default()).unwrap();
        let oracle = thin_svd(&y, Some(q)).unwrap().reconstruct();
        worst = worst.max(rel_frobenius(&fit.z_hat, &oracle));
    }
    verdict(
        4,
        "rank-q SVD is the full-data fit",
        worst <= 1e-8,
        format!("50 instances, ranks 1-5, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_5_noiseless_rank_two_is_recovered() {
    let cfg = SolverConfig {
        tol: 1e-10,
        max_iters: 20_000,
        ..SolverConfig::default()
    };
    let mut recovered = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5_000 + seed);
        let gt = sample_gaussian_model(20, 20, 2, 1.0, 0.0, &mut rng).unwrap();
        let mask = gen_mcar(20, 20, 0.1, &mut rng).unwrap();
        let fit = hard_impute(&gt.y, &mask, 2, &cfg).unwrap();
        let rel = rel_frobenius(&fit.z_hat, &gt.z);
        recovered += usize::from(rel < 1e-6);
        worst = worst.max(rel);
    }
    verdict(
        5,
        "exact completion of noiseless rank 2",
        recovered >= 45,
        format!("{recovered}/50 seeds below 1e-6, worst {worst:.2e}"),
    );
}

#[test]
fn criterion_6_mechanism_invariants() {
    let mut multiset_ok = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6_000 + seed);
        let y = DenseMatrix::standard_normal(300, 300, &mut rng);
        let mar = gen_mar_rowperm(&y, 0.3, 0, &mut rng).unwrap();
        let rows = |m: &ObservationMask| {
            let mut v: Vec<Vec<bool>> = (0..m.rows()).map(|i| m.row_pattern(i).to_vec()).collect();
            v.sort();
            v
        };
        multiset_ok += usize::from(rows(&mar.mask) == rows(&mar.donor));
    }
    let mut fractions = Vec::new();
    for (k, p) in [0.1, 0.5, 0.8].into_iter().enumerate() {
        let mask = gen_mcar(
            300,
            300,
            p,
            &mut ChaCha8Rng::seed_from_u64(6_500 + k as u64),
        )
        .unwrap();
        fractions.push((p, mask_stats(&mask, None).missing_fraction));
    }
    let fractions_ok = fractions.iter().all(|(p, f)| (p - f).abs() <= 0.02);
    verdict(
        6,
        "mechanism invariants",
        multiset_ok == 100 && fractions_ok,
        format!("row multisets equal for {multiset_ok}/100 seeds; MCAR fractions {fractions:?}"),
    );
}

#[test]
fn criterion_7_objective_traces_descend() {
    let cfg = SolverConfig::default();
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + seed);
        let q = 1 + (seed as usize) % 4;
        let p = 0.1 + 0.6 * rng.gen::<f64>();
        let gt = sample_gaussian_model(30, 25, q, 1.0, 0.1, &mut rng).unwrap();
        let mask = gen_mcar(30, 25, p, &mut rng).unwrap();
        let top = spectral_norm(&project_observed(&gt.y, &mask).unwrap()).unwrap();
        let lambda = top * (0.02 + 0.3 * rng.gen::<f64>());
        for fit in [
            soft_impute(&gt.y, &mask, lambda, &cfg).unwrap(),
            hard_impute(&gt.y, &mask, q, &cfg).unwrap(),
        ] {
            let rise = fit.max_objective_increase();
            worst = worst.max(rise);
            bad += usize::from(rise > 1e-10);
        }
    }
    verdict(
        7,
        "monotone descent",
        bad == 0,
        format!("200 traces, {bad} violations, largest step change {worst:.2e}"),
    );
}

fn determinism_check(
    cfg: &ExperimentConfig,
    first: &BenchReport,
    threads: usize,
) -> (bool, String) {
    let again = run_experiment(cfg, threads).expect("benchmark reruns");
    let a = render_csv(first);
    let b = render_csv(&again);
    (
        a == b,
        format!(
            "{} reps, threads {} vs {threads}: {} CSV bytes, identical={}",
            cfg.n_reps,
            first.threads,
            a.len(),
            a == b
        ),
    )
}

#[test]
fn criterion_8_csv_is_independent_of_thread_count() {
    let (pass, detail) = determinism_check(&scaled_default(), shared_run(), 4);
    verdict(8, "bitwise determinism across thread counts", pass, detail);
}

/// The same check on the full 100-replication default benchmark.
#[test]
#[ignore = "two full default runs take several hours on one core"]
fn criterion_8_full_default_benchmark() {
    let cfg = ExperimentConfig::default();
    let first = run_experiment(&cfg, 1).expect("default benchmark runs");
    let (pass, detail) = determinism_check(&cfg, &first, 4);
    verdict(
        8,
        "bitwise determinism, full default benchmark",
        pass,
        detail,
    );
}

#[test]
fn criterion_9_welch_test_is_calibrated() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let trials = 2000;
    let mut ps: Vec<f64> = (0..trials)
        .map(|_| {
            let xs: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
            let ys: Vec<f64> = (0..25).map(|_| rng.sample(StandardNormal)).collect();
            welch_t_test(&xs, &ys).unwrap().p_two_sided
        })
        .collect();
    ps.sort_by(f64::total_cmp);
    let n = trials as f64;
    let ks = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| (p - i as f64 / n).abs().max(((i + 1) as f64 / n - p).abs()))
        .fold(0.0, f64::max);

    let r = welch_t_test(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let reference = 2.0 * StudentsT::new(0.0, 1.0, 8.0).unwrap().cdf(-1.0);
    let gap = (r.p_two_sided - reference).abs();
    verdict(
        9,
        "Welch calibration",
        ks < 0.05 && gap < 1e-6 && (r.t + 1.0).abs() < 1e-12,
        format!(
            "KS distance {ks:.4} over {trials} null trials; worked example t={:.4} p={:.6} vs reference {reference:.6}",
            r.t, r.p_two_sided
        ),
    );
}

#[test]
fn mechanisms_in_default_config_are_mcar_and_mar() {
    let cfg = ExperimentConfig::default();
    assert_eq!(
        cfg.mechanisms,
        vec![MechanismKind::Mcar, MechanismKind::MarRowPerm]
    );
}
