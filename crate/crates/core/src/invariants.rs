//! Online monitors for the structural guarantees of the steady-state SPEA2
//! on OneMinMax.
//!
//! Each check is a pure function of consecutive states. It stays silent
//! unless its hypotheses hold and its conclusion fails. The
//! [`MonitorSuite`] picks the checks that apply to an algorithm
//! configuration and turns findings into [`MonitorReport`]s.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Origin, StepEvent};
use crate::spread::{AlphaBeta, IntervalProfile};
use crate::variation::MutationKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorId {
    /// The number of distinct objective values never drops.
    Archive,
    /// The smallest gap `X` never drops.
    MinGap,
    /// `(-X, N_min)` and `(Y, M_max)` never increase lexicographically.
    LexKeys,
    /// With `X > 1` the removed member is the parent or the offspring.
    EasyRemoval,
    /// Minimal border gaps stay minimal while `(X, N_min)` is unchanged.
    BorderPersistence,
    /// Extreme objective values are never lost once present.
    Extremes,
}

impl MonitorId {
    pub fn as_str(&self) -> &'static str {
        match self {
            MonitorId::Archive => "archive",
            MonitorId::MinGap => "min_gap",
            MonitorId::LexKeys => "lex_keys",
            MonitorId::EasyRemoval => "easy_removal",
            MonitorId::BorderPersistence => "border_persistence",
            MonitorId::Extremes => "extremes",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Violation,
    /// Recorded for algorithms the guarantee was not established for.
    Advisory,
}

/// A failed conclusion found by one check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub monitor: MonitorId,
    pub detail: String,
}

impl Finding {
    fn new(monitor: MonitorId, detail: String) -> Option<Finding> {
        Some(Finding { monitor, detail })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub monitor: MonitorId,
    pub iteration: u64,
    pub severity: Severity,
    pub detail: String,
    pub prev_profile: IntervalProfile,
    pub next_profile: IntervalProfile,
    pub event: StepEvent,
}

fn distinct(values: &[u64]) -> usize {
    values.iter().collect::<BTreeSet<_>>().len()
}

/// Distinct first-objective values are enough on OneMinMax, where they
/// determine the objective vector.
pub fn monitor_archive(prev: &[u64], next: &[u64]) -> Option<Finding> {
    let (a, b) = (distinct(prev), distinct(next));
    if b < a {
        return Finding::new(
            MonitorId::Archive,
            format!("distinct objective values dropped from {a} to {b}"),
        );
    }
    None
}

pub fn monitor_min_gap(prev: &IntervalProfile, next: &IntervalProfile) -> Option<Finding> {
    if !(prev.is_defined() && next.is_defined()) {
        return None;
    }
    if next.min_gap < prev.min_gap {
        return Finding::new(
            MonitorId::MinGap,
            format!("smallest gap dropped from {} to {}", prev.min_gap, next.min_gap),
        );
    }
    None
}

pub fn monitor_lex_keys(prev: &IntervalProfile, next: &IntervalProfile) -> Option<Finding> {
    let (Ok(a), Ok(b)) = (prev.lex_key_min(), next.lex_key_min()) else {
        return None;
    };
    if b > a {
        return Finding::new(
            MonitorId::LexKeys,
            format!("(-X, N_min) increased from {a:?} to {b:?}"),
        );
    }
    let (Ok(a), Ok(b)) = (prev.lex_key_max(), next.lex_key_max()) else {
        return None;
    };
    if b > a {
        return Finding::new(
            MonitorId::LexKeys,
            format!("(Y, M_max) increased from {a:?} to {b:?}"),
        );
    }
    None
}

pub fn monitor_easy_removal(event: &StepEvent, prev: &IntervalProfile) -> Option<Finding> {
    if !prev.is_defined() || prev.min_gap <= 1 || event.parents.len() != 1 {
        return None;
    }
    let parent = event.parents[0];
    for r in &event.removed {
        let allowed = matches!(r.origin, Origin::Offspring(0))
            || matches!(r.origin, Origin::Parent(p) if p == parent);
        if !allowed {
            return Finding::new(
                MonitorId::EasyRemoval,
                format!(
                    "removed {:?} (value {}) while X = {}; parent was slot {parent}",
                    r.origin, r.f1, prev.min_gap
                ),
            );
        }
    }
    None
}

pub fn monitor_border_persistence(
    prev: &IntervalProfile,
    next: &IntervalProfile,
    target: AlphaBeta,
) -> Option<Finding> {
    let (Ok(key), Ok(next_key)) = (prev.lex_key_min(), next.lex_key_min()) else {
        return None;
    };
    let optimum = (-(target.alpha as i64), target.beta as usize);
    if prev.min_gap <= 1 || key <= optimum || key != next_key {
        return None;
    }
    let x = prev.min_gap;
    if prev.first_gap() == Some(x) && next.first_gap() != Some(x) {
        return Finding::new(
            MonitorId::BorderPersistence,
            format!("first gap left the minimum {x}: now {:?}", next.first_gap()),
        );
    }
    if prev.last_gap() == Some(x) && next.last_gap() != Some(x) {
        return Finding::new(
            MonitorId::BorderPersistence,
            format!("last gap left the minimum {x}: now {:?}", next.last_gap()),
        );
    }
    None
}

pub fn monitor_extremes(prev: &[u64], next: &[u64], n: u64) -> Option<Finding> {
    let has = |v: &[u64], x: u64| v.contains(&x);
    if !(has(prev, 0) && has(prev, n)) {
        return None;
    }
    for extreme in [0, n] {
        if !has(next, extreme) {
            return Finding::new(
                MonitorId::Extremes,
                format!("extreme value {extreme} was lost"),
            );
        }
    }
    None
}

/// The checks attached to one trajectory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonitorSuite {
    pub enabled: Vec<MonitorId>,
    pub severity: Severity,
    pub n: u64,
    pub target: Option<AlphaBeta>,
}

impl MonitorSuite {
    pub fn none(n: u64) -> Self {
        MonitorSuite {
            enabled: Vec::new(),
            severity: Severity::Violation,
            n,
            target: None,
        }
    }

    /// Every check whose hypotheses the configuration satisfies: the archive
    /// and extreme-value guarantees hold for any SPEA2; the gap guarantees need
    /// the steady-state form, and all but the smallest-gap one need one-bit
    /// mutation.
    pub fn for_spea2(n: u64, mu: usize, lambda: usize, mutation: MutationKind) -> Self {
        let mut enabled = vec![MonitorId::Archive, MonitorId::Extremes];
        if lambda == 1 && mu as u64 <= n {
            enabled.push(MonitorId::MinGap);
            if mutation == MutationKind::OneBit {
                enabled.extend([
                    MonitorId::LexKeys,
                    MonitorId::EasyRemoval,
                    MonitorId::BorderPersistence,
                ]);
            }
        }
        MonitorSuite {
            enabled,
            severity: Severity::Violation,
            n,
            target: crate::spread::alpha_beta(n, mu as u64).ok(),
        }
    }

    /// Only the archive check, reported as advisory.
    pub fn for_nsga2(n: u64) -> Self {
        MonitorSuite {
            enabled: vec![MonitorId::Archive],
            severity: Severity::Advisory,
            n,
            target: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.enabled.is_empty()
    }

    pub fn check(
        &self,
        prev_values: &[u64],
        next_values: &[u64],
        prev: &IntervalProfile,
        next: &IntervalProfile,
        event: &StepEvent,
    ) -> Vec<Finding> {
        self.enabled
            .iter()
            .filter_map(|id| match id {
                MonitorId::Archive => monitor_archive(prev_values, next_values),
                MonitorId::MinGap => monitor_min_gap(prev, next),
                MonitorId::LexKeys => monitor_lex_keys(prev, next),
                MonitorId::EasyRemoval => monitor_easy_removal(event, prev),
                MonitorId::BorderPersistence => self
                    .target
                    .and_then(|t| monitor_border_persistence(prev, next, t)),
                MonitorId::Extremes => monitor_extremes(prev_values, next_values, self.n),
            })
            .collect()
    }

    pub fn observe(
        &self,
        prev_values: &[u64],
        next_values: &[u64],
        prev: &IntervalProfile,
        next: &IntervalProfile,
        event: &StepEvent,
    ) -> Vec<MonitorReport> {
        self.check(prev_values, next_values, prev, next, event)
            .into_iter()
            .map(|f| MonitorReport {
                monitor: f.monitor,
                iteration: event.iteration,
                severity: self.severity,
                detail: f.detail,
                prev_profile: prev.clone(),
                next_profile: next.clone(),
                event: event.clone(),
            })
            .collect()
    }
}
