//! The generic iteration loop shared by every algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::drift::{DriftProbeConfig, DriftTally};
use crate::harness::record::{Milestone, Milestones, ProfileSample, StopReason, TrajectoryRecord};
use crate::invariants::MonitorSuite;
use crate::model::{Genotype, Population, StepEvent};
use crate::spread::{interval_profile, profile_is_optimal, IntervalProfile};
use crate::variation::RandomSource;

/// One algorithm, seen by the runner.
pub trait Stepper<G: Genotype> {
    fn population_size(&self) -> usize;
    fn offspring_per_step(&self) -> usize;
    /// Monitors whose hypotheses this configuration satisfies.
    fn monitor_suite(&self, n: usize) -> MonitorSuite;
    fn step(&self, pop: &Population<G>, rng: &mut RandomSource) -> Result<(Population<G>, StepEvent)>;
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopTarget {
    #[default]
    OptimalSpread,
    /// Both extreme objective values present.
    Extremes,
    /// Run until a budget is exhausted.
    Never,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub target: StopTarget,
    /// No iteration is started that would exceed this many evaluations.
    pub max_evaluations: Option<u64>,
    pub max_iterations: Option<u64>,
}

impl StopRule {
    pub fn has_budget(&self) -> bool {
        self.max_evaluations.is_some() || self.max_iterations.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub stop: StopRule,
    pub monitors: bool,
    /// Record a profile sample every this many iterations (and at the end).
    pub sample_every: Option<u64>,
    pub drift: Option<DriftProbeConfig>,
}

struct State {
    values: Vec<u64>,
    profile: IntervalProfile,
    optimal: bool,
}

impl State {
    fn of<G: Genotype>(pop: &Population<G>, n: u64) -> Self {
        let values = pop.f1_values();
        let profile = interval_profile(&values, n);
        let optimal = profile_is_optimal(&profile, n);
        State { values, profile, optimal }
    }

    fn has_extremes(&self, n: u64) -> bool {
        self.values.contains(&0) && self.values.contains(&n)
    }
}

/// Iterates `stepper` from `init`. Milestones and the stop rule are checked
/// on the initial population and after every iteration. Monitors and the
/// drift probe only read states, so they never change the trajectory.
pub fn run_trajectory<G: Genotype, S: Stepper<G> + ?Sized>(
    stepper: &S,
    n: usize,
    init: Population<G>,
    options: &RunOptions,
    rng: &mut RandomSource,
) -> Result<TrajectoryRecord> {
    let mu = stepper.population_size();
    let lambda = stepper.offspring_per_step() as u64;
    if init.len() != mu {
        return Err(LabError::precondition(format!(
            "initial population has {} members, expected {mu}",
            init.len()
        )));
    }
    if let Some(bad) = init.iter().find(|x| x.len() != n) {
        return Err(LabError::precondition(format!(
            "genotype of length {} in a problem of size {n}",
            bad.len()
        )));
    }
    let n64 = n as u64;
    let suite = if options.monitors {
        stepper.monitor_suite(n)
    } else {
        MonitorSuite::none(n64)
    };
    let mut drift = options.drift.map(DriftTally::new);
    let distinct_target = mu.min(n + 1);

    let mut milestones = Milestones::default();
    let mut samples = Vec::new();
    let mut reports = Vec::new();
    let mut pop = init;
    let mut state = State::of(&pop, n64);
    let mut iteration = 0u64;
    let mut last_sampled = None;

    let stop_reason = loop {
        let evaluations = mu as u64 + lambda * iteration;
        let at = Some(Milestone { iteration, evaluations });
        let m = &mut milestones;
        if m.distinct.is_none() && state.profile.sorted_values.len() >= distinct_target {
            m.distinct = at;
        }
        if m.extremes.is_none() && state.has_extremes(n64) {
            m.extremes = at;
        }
        if m.min_gap_two.is_none() && state.profile.is_defined() && state.profile.min_gap >= 2 {
            m.min_gap_two = at;
        }
        if m.optimal.is_none() && state.optimal {
            m.optimal = at;
        }
        if let Some(k) = options.sample_every {
            if k > 0 && iteration.is_multiple_of(k) {
                samples.push(ProfileSample::new(
                    iteration,
                    evaluations,
                    &state.values,
                    &state.profile,
                    state.optimal,
                ));
                last_sampled = Some(iteration);
            }
        }

        let reason = match options.stop.target {
            StopTarget::OptimalSpread if state.optimal => Some(StopReason::OptimalSpread),
            StopTarget::Extremes if state.has_extremes(n64) => Some(StopReason::Extremes),
            _ => None,
        };
        let reason = reason.or_else(|| {
            if options.stop.max_iterations.is_some_and(|b| iteration >= b) {
                Some(StopReason::IterationBudget)
            } else if options.stop.max_evaluations.is_some_and(|b| evaluations + lambda > b) {
                Some(StopReason::EvaluationBudget)
            } else {
                None
            }
        });
        if let Some(r) = reason {
            break r;
        }

        let (next, mut event) = stepper.step(&pop, rng)?;
        iteration += 1;
        event.iteration = iteration;
        let next_state = State::of(&next, n64);
        if !suite.is_empty() {
            reports.extend(suite.observe(
                &state.values,
                &next_state.values,
                &state.profile,
                &next_state.profile,
                &event,
            ));
        }
        if let Some(d) = drift.as_mut() {
            d.observe(&state.profile, &next_state.profile);
        }
        pop = next;
        state = next_state;
    };

    let evaluations = mu as u64 + lambda * iteration;
    if options.sample_every.is_some_and(|k| k > 0) && last_sampled != Some(iteration) {
        samples.push(ProfileSample::new(
            iteration,
            evaluations,
            &state.values,
            &state.profile,
            state.optimal,
        ));
    }
    Ok(TrajectoryRecord {
        seed: rng.seed(),
        iterations: iteration,
        evaluations,
        reached_optimal: milestones.optimal.is_some(),
        stop_reason,
        milestones,
        samples,
        drift,
        reports,
        final_values: state.values,
    })
}
