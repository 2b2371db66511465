use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lowrank_bench::render::render;
use lowrank_bench::{
    run_experiment_with_progress, BenchError, ExperimentConfig, OutputFormat, SolverKind,
};
use lowrank_core::metrics::ErrorScope;

/// Replicated low-rank completion benchmark under MCAR and MAR missingness.
#[derive(Debug, Parser)]
#[command(name = "lowrank-bench", version)]
struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated ranks.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Comma-separated missing proportions in (0, 1).
    #[arg(long, value_delimiter = ',')]
    props: Option<Vec<f64>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Master seed; takes precedence over LOWRANK_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// soft | hard
    #[arg(long)]
    solver: Option<SolverKind>,
    /// OBSERVED | MISSING | ALL
    #[arg(long)]
    scope: Option<ErrorScope>,
    /// Write the rendering here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// ascii | csv | json
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress progress on stderr.
    #[arg(long)]
    quiet: bool,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig, BenchError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Ok(raw) = std::env::var("LOWRANK_SEED") {
        cfg.master_seed = raw.trim().parse().map_err(|_| {
            BenchError::Config(format!("LOWRANK_SEED is not an unsigned integer: {raw:?}"))
        })?;
    }
    if let Some(v) = cli.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = cli.m {
        cfg.m = v;
    }
    if let Some(v) = cli.n {
        cfg.n = v;
    }
    if let Some(v) = &cli.ranks {
        cfg.ranks = v.clone();
    }
    if let Some(v) = &cli.props {
        cfg.missing_props = v.clone();
    }
    if let Some(v) = cli.reps {
        cfg.n_reps = v;
    }
    if let Some(v) = cli.solver {
        cfg.solver = v;
    }
    if let Some(v) = cli.scope {
        cfg.error_scope = v;
    }
    if let Some(v) = cli.format {
        cfg.format = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let cfg = build_config(&cli)?;
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let quiet = cli.quiet;
    let report = run_experiment_with_progress(&cfg, threads, |done, total| {
        if !quiet && (done == total || done % (total / 20).max(1) == 0) {
            eprintln!("[{done}/{total}] replications done");
        }
    })?;
    let text = render(&report, cfg.format);
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| BenchError::Io {
            path: path.clone(),
            source,
        })?,
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
