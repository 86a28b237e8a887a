//! Artifacts: one trajectory CSV per seed, a summary JSON and the monitor
//! reports as JSON lines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::drift::{estimate_drift, DriftEstimate};
use crate::harness::record::{StopReason, TrajectoryRecord};
use crate::harness::sweep::MilestoneStats;
use crate::invariants::{MonitorReport, Severity};

pub const TRAJECTORY_HEADER: [&str; 10] = [
    "iteration",
    "evaluations",
    "X",
    "N_min",
    "Y",
    "M_max",
    "min_f1",
    "max_f1",
    "distinct",
    "optimal",
];

pub fn write_trajectory_csv(path: &Path, record: &TrajectoryRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &record.samples {
        w.write_record([
            s.iteration.to_string(),
            s.evaluations.to_string(),
            s.x.to_string(),
            s.n_min.to_string(),
            s.y.to_string(),
            s.m_max.to_string(),
            s.min_f1.to_string(),
            s.max_f1.to_string(),
            s.distinct.to_string(),
            u8::from(s.optimal).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_jsonl<'a>(path: &Path, reports: impl IntoIterator<Item = &'a MonitorReport>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in reports {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub iterations: u64,
    pub evaluations: u64,
    pub reached_optimal: bool,
    pub stop_reason: StopReason,
    pub monitor_reports: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilestoneSummary {
    pub distinct: MilestoneStats,
    pub extremes: MilestoneStats,
    pub min_gap_two: MilestoneStats,
    pub optimal: MilestoneStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// The effective configuration, as given by the caller.
    pub config: serde_json::Value,
    pub runs: usize,
    pub reached_optimal: usize,
    pub violations: usize,
    pub advisories: usize,
    pub milestones: MilestoneSummary,
    pub drift: Option<DriftEstimate>,
    pub seeds: Vec<SeedSummary>,
}

impl Summary {
    pub fn new(config: serde_json::Value, records: &[TrajectoryRecord]) -> Self {
        let count = |sev: Severity| {
            records
                .iter()
                .flat_map(|r| &r.reports)
                .filter(|r| r.severity == sev)
                .count()
        };
        Summary {
            config,
            runs: records.len(),
            reached_optimal: records.iter().filter(|r| r.reached_optimal).count(),
            violations: count(Severity::Violation),
            advisories: count(Severity::Advisory),
            milestones: MilestoneSummary {
                distinct: MilestoneStats::of(records, |r| r.milestones.distinct),
                extremes: MilestoneStats::of(records, |r| r.milestones.extremes),
                min_gap_two: MilestoneStats::of(records, |r| r.milestones.min_gap_two),
                optimal: MilestoneStats::of(records, |r| r.milestones.optimal),
            },
            drift: estimate_drift(records).ok(),
            seeds: records
                .iter()
                .map(|r| SeedSummary {
                    seed: r.seed,
                    iterations: r.iterations,
                    evaluations: r.evaluations,
                    reached_optimal: r.reached_optimal,
                    stop_reason: r.stop_reason,
                    monitor_reports: r.reports.len(),
                })
                .collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes `trajectories/seed_<seed>.csv` for records with samples,
/// `monitor_reports.jsonl` and `summary.json` under `out`. Returns the
/// written paths in that order.
pub fn write_artifacts(out: &Path, summary: &Summary, records: &[TrajectoryRecord]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let mut paths = Vec::new();
    if records.iter().any(|r| !r.samples.is_empty()) {
        let dir = out.join("trajectories");
        fs::create_dir_all(&dir)?;
        for r in records.iter().filter(|r| !r.samples.is_empty()) {
            let p = dir.join(format!("seed_{}.csv", r.seed));
            write_trajectory_csv(&p, r)?;
            paths.push(p);
        }
    }
    let reports = out.join("monitor_reports.jsonl");
    write_reports_jsonl(&reports, records.iter().flat_map(|r| &r.reports))?;
    paths.push(reports);
    let s = out.join("summary.json");
    write_json(&s, summary)?;
    paths.push(s);
    Ok(paths)
}
