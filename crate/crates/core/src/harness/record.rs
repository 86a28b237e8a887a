use serde::{Deserialize, Serialize};

use crate::harness::drift::DriftTally;
use crate::invariants::MonitorReport;
use crate::spread::IntervalProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub iteration: u64,
    pub evaluations: u64,
}

/// First time each property held. `distinct` means `min(mu, n+1)` distinct
/// objective values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestones {
    pub distinct: Option<Milestone>,
    pub extremes: Option<Milestone>,
    pub min_gap_two: Option<Milestone>,
    pub optimal: Option<Milestone>,
}

/// One row of the trajectory CSV. Profile columns are 0 when the profile is
/// undefined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub iteration: u64,
    pub evaluations: u64,
    pub x: u64,
    pub n_min: usize,
    pub y: u64,
    pub m_max: usize,
    pub min_f1: u64,
    pub max_f1: u64,
    pub distinct: usize,
    pub optimal: bool,
}

impl ProfileSample {
    pub fn new(
        iteration: u64,
        evaluations: u64,
        values: &[u64],
        profile: &IntervalProfile,
        optimal: bool,
    ) -> Self {
        ProfileSample {
            iteration,
            evaluations,
            x: profile.min_gap,
            n_min: profile.min_count,
            y: profile.max_gap,
            m_max: profile.max_count,
            min_f1: values.iter().copied().min().unwrap_or(0),
            max_f1: values.iter().copied().max().unwrap_or(0),
            distinct: profile.sorted_values.len(),
            optimal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    OptimalSpread,
    Extremes,
    EvaluationBudget,
    IterationBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// Completed iterations.
    pub iterations: u64,
    /// Objective evaluations including the initial population.
    pub evaluations: u64,
    pub reached_optimal: bool,
    pub stop_reason: StopReason,
    pub milestones: Milestones,
    pub samples: Vec<ProfileSample>,
    pub drift: Option<DriftTally>,
    pub reports: Vec<MonitorReport>,
    /// First-objective values of the final population, in member order.
    pub final_values: Vec<u64>,
}
