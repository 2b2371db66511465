//! Text renderings of a [`BenchReport`]: an aligned table, CSV and JSON.

use std::fmt::Write as _;

use lowrank_core::metrics::CellSummary;
use lowrank_core::missingness::MechanismKind;

use crate::config::{OutputFormat, SolverKind, TestKind};
use crate::error::{BenchError, Result};
use crate::experiment::BenchReport;

pub const CSV_HEADER: &str =
    "rank,missing_prop,mechanism,n_reps,mean_rel_err_pct,sd_rel_err,welch_p";

/// `printf("%g")`: six significant digits, trailing zeros dropped,
/// exponent form below 1e-4 and from 1e6 up.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip_zeros(mantissa), exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn percent_label(p: f64) -> String {
    format!("{}%", format_g(100.0 * p))
}

pub fn render(report: &BenchReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Ascii => render_ascii(report),
        OutputFormat::Csv => render_csv(report),
        OutputFormat::Json => render_json(report),
    }
}

fn p_value_for(report: &BenchReport, cell: &CellSummary) -> Option<f64> {
    let cmp = report.comparison(cell.rank, cell.missing_prop)?;
    if cell.mechanism != cmp.first && cell.mechanism != cmp.second {
        return None;
    }
    cmp.result.map(|t| t.p_two_sided)
}

/// One row per cell; `welch_p` holds the two-sample p-value of the cell's
/// (rank, proportion) for the two compared mechanisms and `NA` otherwise.
pub fn render_csv(report: &BenchReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for cell in &report.cells {
        let s = &cell.summary;
        let p = p_value_for(report, s).map_or_else(|| "NA".to_string(), format_g);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.rank,
            format_g(s.missing_prop),
            s.mechanism.name(),
            s.n_reps,
            format_g(s.mean_rel_err),
            format_g(s.sd_rel_err),
            p
        );
    }
    out
}

pub fn render_json(report: &BenchReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn error_table(
    report: &BenchReport,
    out: &mut String,
    pick: impl Fn(&crate::experiment::CellRecord) -> &CellSummary,
) {
    let cfg = &report.config;
    let _ = write!(out, "{:<6}{:<11}", "Rank", "Mechanism");
    for &p in &cfg.missing_props {
        let _ = write!(out, "{:>10}", percent_label(p));
    }
    out.push('\n');
    for &rank in &cfg.ranks {
        for (k, &mech) in cfg.mechanisms.iter().enumerate() {
            let head = if k == 0 {
                rank.to_string()
            } else {
                String::new()
            };
            let _ = write!(out, "{head:<6}{:<11}", mech.label());
            for &p in &cfg.missing_props {
                let v = report.cell(rank, p, mech).map(|c| pick(c).mean_rel_err);
                let _ = write!(
                    out,
                    "{:>10}",
                    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
                );
            }
            out.push('\n');
        }
    }
}

pub fn render_ascii(report: &BenchReport) -> String {
    let cfg = &report.config;
    let solver = match cfg.solver {
        SolverKind::SoftImpute => "soft-impute",
        SolverKind::HardImpute => "hard-impute",
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Relative errors (%) on {} entries: {}x{}, sigma {}, {} replications, {solver}",
        cfg.error_scope.name(),
        cfg.m,
        cfg.n,
        format_g(cfg.sigma),
        cfg.n_reps
    );
    error_table(report, &mut out, |c| &c.summary);

    for (k, scope) in cfg.scopes().iter().enumerate().skip(1) {
        let _ = writeln!(out, "\nRelative errors (%) on {} entries", scope.name());
        error_table(report, &mut out, |c| &c.extra[k - 1]);
    }

    if let Some(first) = report.comparisons.first() {
        let test = match first.test {
            TestKind::Welch => "Welch",
            TestKind::Paired => "paired",
        };
        let _ = writeln!(
            out,
            "\n{test} t-test p-values, {} vs {}",
            first.first.label(),
            first.second.label()
        );
        let _ = write!(out, "{:<17}", "Rank");
        for &p in &cfg.missing_props {
            let _ = write!(out, "{:>10}", percent_label(p));
        }
        out.push('\n');
        for &rank in &cfg.ranks {
            let _ = write!(out, "{rank:<17}");
            for &p in &cfg.missing_props {
                let v = report
                    .comparison(rank, p)
                    .and_then(|c| c.result)
                    .map(|t| t.p_two_sided);
                let _ = write!(
                    out,
                    "{:>10}",
                    v.map_or_else(|| "NA".into(), |v| format!("{v:.4}"))
                );
            }
            out.push('\n');
        }
    }
    out
}

/// A parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub rank: usize,
    pub missing_prop: f64,
    pub mechanism: MechanismKind,
    pub n_reps: usize,
    pub mean_rel_err_pct: f64,
    pub sd_rel_err: f64,
    pub welch_p: Option<f64>,
}

fn field<T: std::str::FromStr>(value: &str, name: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| BenchError::Csv {
        line,
        msg: format!("bad {name} {value:?}"),
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        _ => {
            return Err(BenchError::Csv {
                line: 1,
                msg: "missing or unexpected header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(k, l)| {
            let line = k + 1;
            let parts: Vec<&str> = l.split(',').collect();
            if parts.len() != 7 {
                return Err(BenchError::Csv {
                    line,
                    msg: format!("expected 7 fields, found {}", parts.len()),
                });
            }
            Ok(CsvRow {
                rank: field(parts[0], "rank", line)?,
                missing_prop: field(parts[1], "missing_prop", line)?,
                mechanism: parts[2].parse().map_err(|_| BenchError::Csv {
                    line,
                    msg: format!("bad mechanism {:?}", parts[2]),
                })?,
                n_reps: field(parts[3], "n_reps", line)?,
                mean_rel_err_pct: field(parts[4], "mean_rel_err_pct", line)?,
                sd_rel_err: field(parts[5], "sd_rel_err", line)?,
                welch_p: match parts[6] {
                    "NA" => None,
                    v => Some(field(v, "welch_p", line)?),
                },
            })
        })
        .collect()
}
