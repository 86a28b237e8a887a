//! Scaling sweeps over `(n, mu)` grids against the theoretical envelopes.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::experiment::{run_replications, ExperimentConfig};
use crate::harness::record::{Milestone, TrajectoryRecord};

/// `mu^2 n ln(mu) ln(n)`, the order of the expected optimisation time of the
/// steady-state SPEA2.
pub fn spread_envelope(n: usize, mu: usize) -> f64 {
    let (n, mu) = (n as f64, mu as f64);
    mu * mu * n * mu.ln() * n.ln()
}

/// `n ln(n)`, the order of the time to find both extremes.
pub fn extremes_envelope(n: usize) -> f64 {
    let n = n as f64;
    n * n.ln()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(LabError::precondition("a slope needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(LabError::precondition("log-log slope needs positive values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::precondition("all x values coincide"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Mean, median and extremes of the evaluation counts at one milestone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilestoneStats {
    pub reached: usize,
    pub runs: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub min: Option<u64>,
    pub max: Option<u64>,
}

impl MilestoneStats {
    pub fn of(records: &[TrajectoryRecord], pick: impl Fn(&TrajectoryRecord) -> Option<Milestone>) -> Self {
        let mut evals: Vec<u64> = records.iter().filter_map(|r| pick(r).map(|m| m.evaluations)).collect();
        evals.sort_unstable();
        let k = evals.len();
        let median = (k > 0).then(|| {
            if k % 2 == 1 {
                evals[k / 2] as f64
            } else {
                (evals[k / 2 - 1] + evals[k / 2]) as f64 / 2.0
            }
        });
        MilestoneStats {
            reached: k,
            runs: records.len(),
            mean: (k > 0).then(|| evals.iter().sum::<u64>() as f64 / k as f64),
            median,
            min: evals.first().copied(),
            max: evals.last().copied(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub mu: usize,
    pub seeds: usize,
    pub distinct: MilestoneStats,
    pub extremes: MilestoneStats,
    pub optimal: MilestoneStats,
    pub spread_envelope: f64,
    pub extremes_envelope: f64,
    /// Mean evaluations to optimal spread over `spread_envelope`.
    pub optimal_ratio: Option<f64>,
    /// Mean evaluations to both extremes over `extremes_envelope`.
    pub extremes_ratio: Option<f64>,
}

impl SweepRow {
    pub fn from_records(n: usize, mu: usize, records: &[TrajectoryRecord]) -> Self {
        let optimal = MilestoneStats::of(records, |r| r.milestones.optimal);
        let extremes = MilestoneStats::of(records, |r| r.milestones.extremes);
        let spread = spread_envelope(n, mu);
        let ext = extremes_envelope(n);
        SweepRow {
            n,
            mu,
            seeds: records.len(),
            distinct: MilestoneStats::of(records, |r| r.milestones.distinct),
            optimal_ratio: optimal.mean.map(|m| m / spread),
            extremes_ratio: extremes.mean.map(|m| m / ext),
            extremes,
            optimal,
            spread_envelope: spread,
            extremes_envelope: ext,
        }
    }
}

/// Runs `base` (algorithm, stop rule, seeds, ...) at every grid cell.
pub fn scaling_sweep(base: &ExperimentConfig, grid: &[(usize, usize)]) -> Result<Vec<SweepRow>> {
    let cells: Vec<ExperimentConfig> = grid
        .iter()
        .map(|&(n, mu)| {
            let mut cfg = base.clone();
            cfg.n = n;
            cfg.mu = mu;
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<_>>()?;
    cells
        .iter()
        .map(|cfg| Ok(SweepRow::from_records(cfg.n, cfg.mu, &run_replications(cfg)?)))
        .collect()
}
