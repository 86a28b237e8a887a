//! Empirical drift of the two odd gaps of the counterexample.
//!
//! While every gap has length `c` except one of length `c+1` (the wide gap)
//! and one of length `c-1` (the narrow gap), each iteration moves either odd
//! gap by at most one index. The probe counts, per index, how often the
//! state was observed and how often the gap moved up or down. Iterations in
//! which the two odd gaps are neighbours are skipped: there the moves follow
//! different rules and the gaps may merge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::record::TrajectoryRecord;
use crate::spread::IntervalProfile;

/// Below this many conditioned moves an estimate is flagged.
pub const LOW_CONFIDENCE_MOVES: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftProbeConfig {
    pub n: usize,
    pub c: usize,
}

impl DriftProbeConfig {
    pub fn gap_count(&self) -> usize {
        self.n / self.c
    }

    /// Inclusive index window of the wide gap, `[n'/16, 3n'/16]`.
    pub fn wide_window(&self) -> (usize, usize) {
        let unit = self.gap_count() / 16;
        (unit, 3 * unit)
    }

    /// Inclusive index window of the narrow gap, `[3n'/16, 5n'/16]`.
    pub fn narrow_window(&self) -> (usize, usize) {
        let unit = self.gap_count() / 16;
        (3 * unit, 5 * unit)
    }

    /// 1-based indices of the wide and narrow gap, if the profile still has
    /// the counterexample shape.
    pub fn locate(&self, profile: &IntervalProfile) -> Option<(usize, usize)> {
        if !profile.is_defined() || profile.gaps.len() != self.gap_count() {
            return None;
        }
        let c = self.c as u64;
        let (mut wide, mut narrow) = (None, None);
        for (i, &g) in profile.gaps.iter().enumerate() {
            if g == c + 1 && wide.is_none() {
                wide = Some(i + 1);
            } else if g == c - 1 && narrow.is_none() {
                narrow = Some(i + 1);
            } else if g != c {
                return None;
            }
        }
        Some((wide?, narrow?))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveTally {
    /// Iterations that started with the gap at this index.
    pub observed: u64,
    pub up: u64,
    pub down: u64,
}

impl MoveTally {
    fn add(&mut self, other: &MoveTally) {
        self.observed += other.observed;
        self.up += other.up;
        self.down += other.down;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftTally {
    pub config: DriftProbeConfig,
    pub wide: BTreeMap<usize, MoveTally>,
    pub narrow: BTreeMap<usize, MoveTally>,
}

impl DriftTally {
    pub fn new(config: DriftProbeConfig) -> Self {
        DriftTally {
            config,
            wide: BTreeMap::new(),
            narrow: BTreeMap::new(),
        }
    }

    pub fn observe(&mut self, prev: &IntervalProfile, next: &IntervalProfile) {
        let Some((x, y)) = self.config.locate(prev) else {
            return;
        };
        if x.abs_diff(y) == 1 {
            return;
        }
        let after = self.config.locate(next);
        let tally = |map: &mut BTreeMap<usize, MoveTally>, at: usize, window: (usize, usize), to: Option<usize>| {
            if at < window.0 || at > window.1 {
                return;
            }
            let t = map.entry(at).or_default();
            t.observed += 1;
            match to {
                Some(j) if j > at => t.up += 1,
                Some(j) if j < at => t.down += 1,
                _ => {}
            }
        };
        tally(&mut self.wide, x, self.config.wide_window(), after.map(|a| a.0));
        tally(&mut self.narrow, y, self.config.narrow_window(), after.map(|a| a.1));
    }

    pub fn merge(&mut self, other: &DriftTally) {
        for (k, v) in &other.wide {
            self.wide.entry(*k).or_default().add(v);
        }
        for (k, v) in &other.narrow {
            self.narrow.entry(*k).or_default().add(v);
        }
    }
}

/// `E[index change | change]` of the wide gap at index `x`, from the move
/// probabilities of the steady-state NSGA-II with one-bit mutation: it moves
/// down with weight `n - c(x-1)` and up with weight `cx + 1`.
pub fn exact_conditional_drift_wide(n: usize, c: usize, x: usize) -> f64 {
    let down = (n - c * (x - 1)) as f64;
    let up = (c * x + 1) as f64;
    (up - down) / (up + down)
}

/// Same for the narrow gap at index `y` to the right of the wide gap: down
/// with weight `c(y-1) + 1`, up with weight `n - cy`.
pub fn exact_conditional_drift_narrow(n: usize, c: usize, y: usize) -> f64 {
    let down = (c * (y - 1) + 1) as f64;
    let up = (n - c * y) as f64;
    (up - down) / (up + down)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexDrift {
    pub index: usize,
    pub observed: u64,
    pub up: u64,
    pub down: u64,
    pub drift: Option<f64>,
    pub exact: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapDrift {
    pub window: (usize, usize),
    pub observed: u64,
    pub moves: u64,
    /// Mean index change over conditioned moves.
    pub drift: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    pub up_probability: Option<f64>,
    pub down_probability: Option<f64>,
    pub low_confidence: bool,
    pub per_index: Vec<IndexDrift>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub config: DriftProbeConfig,
    pub wide: GapDrift,
    pub narrow: GapDrift,
}

fn summarize(
    map: &BTreeMap<usize, MoveTally>,
    window: (usize, usize),
    exact: impl Fn(usize) -> f64,
) -> GapDrift {
    let mut total = MoveTally::default();
    for t in map.values() {
        total.add(t);
    }
    let moves = total.up + total.down;
    let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    let drift = (moves > 0).then(|| (total.up as f64 - total.down as f64) / moves as f64);
    let ci95 = drift.map(|d| {
        let half = 1.96 * ((1.0 - d * d).max(0.0) / moves as f64).sqrt();
        (d - half, d + half)
    });
    GapDrift {
        window,
        observed: total.observed,
        moves,
        drift,
        ci95,
        up_probability: ratio(total.up, total.observed),
        down_probability: ratio(total.down, total.observed),
        low_confidence: moves < LOW_CONFIDENCE_MOVES,
        per_index: map
            .iter()
            .map(|(&index, t)| IndexDrift {
                index,
                observed: t.observed,
                up: t.up,
                down: t.down,
                drift: (t.up + t.down > 0)
                    .then(|| (t.up as f64 - t.down as f64) / (t.up + t.down) as f64),
                exact: exact(index),
            })
            .collect(),
    }
}

/// Pools the probe tallies of all records.
pub fn estimate_drift(records: &[TrajectoryRecord]) -> Result<DriftEstimate> {
    let mut tallies = records.iter().filter_map(|r| r.drift.as_ref());
    let mut pooled = tallies
        .next()
        .ok_or_else(|| LabError::precondition("no record carries drift-probe data"))?
        .clone();
    for t in tallies {
        if t.config != pooled.config {
            return Err(LabError::precondition("drift tallies from different configurations"));
        }
        pooled.merge(t);
    }
    Ok(from_tally(&pooled))
}

pub fn from_tally(tally: &DriftTally) -> DriftEstimate {
    let DriftProbeConfig { n, c } = tally.config;
    DriftEstimate {
        config: tally.config,
        wide: summarize(&tally.wide, tally.config.wide_window(), |x| {
            exact_conditional_drift_wide(n, c, x)
        }),
        narrow: summarize(&tally.narrow, tally.config.narrow_window(), |y| {
            exact_conditional_drift_narrow(n, c, y)
        }),
    }
}
