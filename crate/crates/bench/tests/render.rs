use lowrank_bench::render::{format_g, parse_csv, render, render_ascii, render_csv, CSV_HEADER};
use lowrank_bench::{
    run_experiment, BenchReport, CellRecord, Comparison, ExperimentConfig, OutputFormat, TestKind,
};
use lowrank_core::metrics::{summarize_cell, CellMeta, ErrorScope, TTest};
use lowrank_core::missingness::MechanismKind;

fn cell(mechanism: MechanismKind, rank: usize, p: f64, errs: &[f64]) -> CellRecord {
    let meta = |scope| CellMeta {
        mechanism,
        rank,
        missing_prop: p,
        scope,
    };
    CellRecord {
        summary: summarize_cell(errs, meta(ErrorScope::Missing)).unwrap(),
        extra: vec![summarize_cell(errs, meta(ErrorScope::Observed)).unwrap()],
        ignorable: true,
        child_seeds: vec![1; errs.len()],
        truth_checksums: vec![2; errs.len()],
        regularization: vec![0.5; errs.len()],
        iterations: vec![10; errs.len()],
        n_converged: errs.len(),
    }
}

fn handmade() -> BenchReport {
    let config = ExperimentConfig {
        ranks: vec![5],
        missing_props: vec![0.1, 0.8],
        n_reps: 2,
        ..ExperimentConfig::default()
    };
    BenchReport {
        config,
        version: "0.0.0".into(),
        threads: 1,
        wall_clock_secs: 0.0,
        cells: vec![
            cell(MechanismKind::Mcar, 5, 0.1, &[0.0538, 0.0538]),
            cell(MechanismKind::MarRowPerm, 5, 0.1, &[0.05, 0.06]),
            cell(MechanismKind::Mcar, 5, 0.8, &[0.5512, 0.5512]),
            cell(MechanismKind::MarRowPerm, 5, 0.8, &[1.3950, 1.3950]),
        ],
        comparisons: vec![
            Comparison {
                rank: 5,
                missing_prop: 0.1,
                first: MechanismKind::Mcar,
                second: MechanismKind::MarRowPerm,
                test: TestKind::Welch,
                result: Some(TTest {
                    t: 0.1,
                    df: 1.0,
                    p_two_sided: 0.93654321,
                }),
                relative_gap: 0.02,
            },
            Comparison {
                rank: 5,
                missing_prop: 0.8,
                first: MechanismKind::Mcar,
                second: MechanismKind::MarRowPerm,
                test: TestKind::Welch,
                result: None,
                relative_gap: 1.5,
            },
        ],
    }
}

#[test]
fn ascii_uses_four_decimals() {
    let text = render_ascii(&handmade());
    for needle in [
        "0.0538", "0.5512", "1.3950", "0.0550", "0.9365", "10%", "80%", "MCAR", "MAR",
    ] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
    assert!(text.contains("NA"));
}

#[test]
fn csv_layout() {
    let csv = render_csv(&handmade());
    let lines: Vec<&str> = csv.split('\n').collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines[1], "5,0.1,MCAR,2,0.0538,0,0.936543");
    assert_eq!(lines[4], "5,0.8,MAR_ROWPERM,2,1.395,0,NA");
    assert_eq!(lines.last(), Some(&""));
    assert!(!csv.contains('\r'));
}

#[test]
fn csv_round_trips_numeric_fields() {
    let cfg = ExperimentConfig {
        m: 20,
        n: 18,
        ranks: vec![2, 4],
        missing_props: vec![0.15, 0.45],
        n_reps: 3,
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&cfg, 1).unwrap();
    let rows = parse_csv(&render_csv(&report)).unwrap();
    assert_eq!(rows.len(), report.cells.len());
    let six = |x: f64| format_g(x).parse::<f64>().unwrap();
    for (row, cell) in rows.iter().zip(&report.cells) {
        let s = &cell.summary;
        assert_eq!(row.rank, s.rank);
        assert_eq!(row.missing_prop, s.missing_prop);
        assert_eq!(row.mechanism, s.mechanism);
        assert_eq!(row.n_reps, s.n_reps);
        assert_eq!(row.mean_rel_err_pct, six(s.mean_rel_err));
        assert_eq!(row.sd_rel_err, six(s.sd_rel_err));
        assert!((row.mean_rel_err_pct - s.mean_rel_err).abs() <= 5e-6 * s.mean_rel_err.abs());
        let p = report
            .comparison(s.rank, s.missing_prop)
            .unwrap()
            .result
            .map(|t| six(t.p_two_sided));
        assert_eq!(row.welch_p, p);
    }
}

#[test]
fn json_is_a_faithful_serialization() {
    let report = handmade();
    let text = render(&report, OutputFormat::Json);
    let back: BenchReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}

#[test]
fn malformed_csv_is_rejected() {
    assert!(parse_csv("a,b\n").is_err());
    let bad = format!("{CSV_HEADER}\n5,0.1,MCAR,2,0.1,0.2\n");
    assert!(parse_csv(&bad).is_err());
    let bad = format!("{CSV_HEADER}\n5,0.1,XYZ,2,0.1,0.2,NA\n");
    assert!(parse_csv(&bad).is_err());
}
