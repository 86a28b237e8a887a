//! `spreadlab`: command-line driver for the experiment harness.
//!
//! Exit codes: 0 success, 1 monitor or check failure (or a runtime error),
//! 2 usage error.

mod config;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use spreadlab::harness::counterexample::{counterexample_size, counterexample_values};
use spreadlab::harness::io::{write_artifacts, write_json, Summary};
use spreadlab::harness::oracle::{oracle_check, MAX_POPULATION};
use spreadlab::harness::{run_replications, scaling_sweep, AlgorithmKind, SweepRow, TrajectoryRecord};
use spreadlab::invariants::Severity;
use spreadlab::{alpha_beta, interval_profile, LabError};

use crate::config::{seed_offset, Effective, ExperimentArgs};

/// Largest `n` accepted by `oracle-check`.
const ORACLE_MAX_N: usize = 6;

/// A problem with the invocation itself; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "spreadlab", version, about = "Steady-state SPEA2 and NSGA-II on OneMinMax")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Replicated runs; writes per-seed trajectory CSVs, monitor reports and a summary.
    Run(ExperimentArgs),
    /// Runs the configuration at every `(n, mu)` cell of a grid.
    Sweep(SweepArgs),
    /// Prints the counterexample start state for `(n, c)`.
    Counterexample(CounterexampleArgs),
    /// Compares simulated one-step transitions with the exact oracle on every state.
    OracleCheck(OracleArgs),
    /// Runs with monitors on and tabulates the reports; exit 1 on any violation.
    Monitors(ExperimentArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Grid cells as `n:mu`, comma separated, e.g. `16:4,32:4,64:4`.
    #[arg(long, value_delimiter = ',', value_parser = parse_cell, required = true)]
    grid: Vec<(usize, usize)>,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args, Debug)]
struct CounterexampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    c: usize,
    /// Also write `counterexample.json` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value = "spea2-ss")]
    algo: AlgorithmKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    mu: usize,
    /// Monte Carlo samples per state.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Largest accepted total-variation distance.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_parser = config::positive)]
    threads: Option<u64>,
    /// Also write `oracle_check.csv` here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_cell(s: &str) -> std::result::Result<(usize, usize), String> {
    let (n, mu) = s.split_once(':').ok_or_else(|| format!("grid cell `{s}` is not `n:mu`"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad number `{t}` in `{s}`"));
    Ok((num(n)?, num(mu)?))
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Configuration errors from the core library are usage errors too.
fn lab_usage(e: LabError) -> anyhow::Error {
    match e {
        LabError::InvalidConfig(_) | LabError::InstanceTooLarge(_) | LabError::Precondition(_) => {
            usage(e.to_string())
        }
        other => other.into(),
    }
}

fn set_threads(threads: Option<u64>) -> Result<()> {
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn announce(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn report_count(records: &[TrajectoryRecord]) -> usize {
    records.iter().map(|r| r.reports.len()).sum()
}

fn run_experiment(eff: &Effective) -> Result<(Summary, Vec<TrajectoryRecord>)> {
    set_threads(eff.threads)?;
    let records = run_replications(&eff.experiment).map_err(lab_usage)?;
    let summary = Summary::new(serde_json::to_value(eff)?, &records);
    Ok((summary, records))
}

fn cmd_run(args: &ExperimentArgs) -> Result<ExitCode> {
    let eff = args.resolve("spreadlab-out")?;
    let (summary, records) = run_experiment(&eff)?;
    announce(&write_artifacts(&eff.out, &summary, &records)?);
    println!(
        "{} runs, {} reached optimal spread, {} violations, {} advisories",
        summary.runs, summary.reached_optimal, summary.violations, summary.advisories
    );
    Ok(if eff.strict_invariants && report_count(&records) > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_monitors(args: &ExperimentArgs) -> Result<ExitCode> {
    let mut args = args.clone();
    args.no_monitors = false;
    let mut eff = args.resolve("spreadlab-out")?;
    eff.experiment.sample_every = None;
    let (summary, records) = run_experiment(&eff)?;

    let mut table: BTreeMap<(&str, Severity), usize> = BTreeMap::new();
    for r in records.iter().flat_map(|r| &r.reports) {
        *table.entry((r.monitor.as_str(), r.severity)).or_default() += 1;
    }
    println!("{:<20} {:<10} {:>8}", "monitor", "severity", "reports");
    for ((monitor, severity), count) in &table {
        let sev = match severity {
            Severity::Violation => "violation",
            Severity::Advisory => "advisory",
        };
        println!("{monitor:<20} {sev:<10} {count:>8}");
    }
    if table.is_empty() {
        println!("no reports over {} runs", summary.runs);
    }
    announce(&write_artifacts(&eff.out, &summary, &records)?);

    let failed = summary.violations > 0 || (eff.strict_invariants && summary.advisories > 0);
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config: &'a Effective,
    grid: &'a [(usize, usize)],
    rows: &'a [SweepRow],
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "n",
        "mu",
        "seeds",
        "distinct_mean",
        "extremes_reached",
        "extremes_mean",
        "extremes_envelope",
        "extremes_ratio",
        "optimal_reached",
        "optimal_mean",
        "optimal_median",
        "optimal_max",
        "spread_envelope",
        "optimal_ratio",
    ])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.mu.to_string(),
            r.seeds.to_string(),
            opt(r.distinct.mean),
            r.extremes.reached.to_string(),
            opt(r.extremes.mean),
            r.extremes_envelope.to_string(),
            opt(r.extremes_ratio),
            r.optimal.reached.to_string(),
            opt(r.optimal.mean),
            opt(r.optimal.median),
            opt(r.optimal.max),
            r.spread_envelope.to_string(),
            opt(r.optimal_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode> {
    // The base cell is the largest n, so a default n^3 budget covers every cell.
    let &(n, mu) = args
        .grid
        .iter()
        .max_by_key(|c| c.0)
        .ok_or_else(|| usage("`--grid` needs at least one cell"))?;
    let mut base = args.experiment.clone();
    base.n = Some(n);
    base.mu = Some(mu as u64);
    let mut eff = base.resolve("spreadlab-sweep")?;
    eff.experiment.sample_every = None;
    set_threads(eff.threads)?;
    let rows = scaling_sweep(&eff.experiment, &args.grid).map_err(lab_usage)?;

    std::fs::create_dir_all(&eff.out)?;
    let csv_path = eff.out.join("sweep.csv");
    write_sweep_csv(&csv_path, &rows)?;
    let json_path = eff.out.join("sweep.json");
    write_json(&json_path, &SweepOutput { config: &eff, grid: &args.grid, rows: &rows })?;
    for r in &rows {
        println!(
            "n={} mu={}: optimal {}/{} mean {} (ratio {}), extremes mean {}",
            r.n,
            r.mu,
            r.optimal.reached,
            r.seeds,
            opt(r.optimal.mean.map(|m| format!("{m:.1}"))),
            opt(r.optimal_ratio.map(|m| format!("{m:.4}"))),
            opt(r.extremes.mean.map(|m| format!("{m:.1}"))),
        );
    }
    announce(&[csv_path, json_path]);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CounterexampleOutput {
    n: usize,
    c: usize,
    population_size: usize,
    values: Vec<u64>,
    gaps: Vec<u64>,
    x: u64,
    n_min: usize,
    y: u64,
    m_max: usize,
    alpha: u64,
    beta: u64,
}

fn cmd_counterexample(args: &CounterexampleArgs) -> Result<ExitCode> {
    let values = counterexample_values(args.n, args.c).map_err(lab_usage)?;
    let size = counterexample_size(args.n, args.c).map_err(lab_usage)?;
    let profile = interval_profile(&values, args.n as u64);
    let ab = alpha_beta(args.n as u64, size as u64).map_err(lab_usage)?;
    let out = CounterexampleOutput {
        n: args.n,
        c: args.c,
        population_size: size,
        gaps: profile.gaps.clone(),
        x: profile.min_gap,
        n_min: profile.min_count,
        y: profile.max_gap,
        m_max: profile.max_count,
        alpha: ab.alpha,
        beta: ab.beta,
        values,
    };
    let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
    println!("population size: {}", out.population_size);
    println!("f1 values: {}", list(&out.values));
    println!("gaps: {}", list(&out.gaps));
    println!("X={} N_min={} Y={} M_max={}", out.x, out.n_min, out.y, out.m_max);
    println!("optimal spread: alpha={} beta={}", out.alpha, out.beta);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let p = dir.join("counterexample.json");
        write_json(&p, &out)?;
        announce(&[p]);
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_check(args: &OracleArgs) -> Result<ExitCode> {
    if args.n == 0 || args.n > ORACLE_MAX_N {
        return Err(usage(format!("oracle-check needs 1 <= n <= {ORACLE_MAX_N}, got {}", args.n)));
    }
    if args.mu == 0 || args.mu > MAX_POPULATION {
        return Err(usage(format!("oracle-check needs 1 <= mu <= {MAX_POPULATION}, got {}", args.mu)));
    }
    if !(args.tolerance >= 0.0) || args.samples == 0 {
        return Err(usage("tolerance must be non-negative and samples positive"));
    }
    set_threads(args.threads)?;
    let seed = args
        .seed
        .checked_add(seed_offset()?)
        .ok_or_else(|| usage("seed overflow after SEED_OFFSET"))?;
    let rows = oracle_check(args.algo, args.n, args.mu, args.samples, args.tolerance, seed).map_err(lab_usage)?;

    let failed: Vec<_> = rows.iter().filter(|r| !r.passed).collect();
    for r in &failed {
        println!("FAIL state {:?}: total variation {:.5}", r.state, r.total_variation);
    }
    let worst = rows.iter().map(|r| r.total_variation).fold(0.0, f64::max);
    println!(
        "{}: {} states, {} failing, max total variation {worst:.5} (tolerance {})",
        args.algo,
        rows.len(),
        failed.len(),
        args.tolerance
    );
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let p = dir.join("oracle_check.csv");
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["state", "successors", "total_variation", "passed"])?;
        for r in &rows {
            w.write_record([
                r.state.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
                r.successors.to_string(),
                r.total_variation.to_string(),
                u8::from(r.passed).to_string(),
            ])?;
        }
        w.flush()?;
        announce(&[p]);
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::Monitors(a) => cmd_monitors(a),
    };
    match result {
        Ok(code) => code,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            eprintln!("Run `spreadlab --help` for usage.");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
