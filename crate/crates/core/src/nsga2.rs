//! NSGA-II survival: non-dominated sorting, crowding distance and removal
//! from the critical front, in the classic (N offspring, crowding computed
//! once) and steady-state (one offspring per iteration) forms.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::record::TrajectoryRecord;
use crate::harness::runner::{self, RunOptions, Stepper};
use crate::invariants::MonitorSuite;
use crate::model::{Genotype, ObjectiveValue, Population, RemovedMember, StepEvent};
use crate::variation::{MutationKind, RandomSource};

/// Non-domination layers `F_1..F_r` of a combined population and the
/// critical rank for a given capacity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontPartition {
    /// Member indices of each layer, ascending within a layer.
    pub fronts: Vec<Vec<usize>>,
    /// 1-based index of the first layer at which the cumulative size reaches
    /// the capacity (the last layer if it never does).
    pub critical_rank: usize,
}

impl FrontPartition {
    pub fn critical_front(&self) -> &[usize] {
        &self.fronts[self.critical_rank - 1]
    }

    /// Number of members in the layers before the critical one.
    pub fn before_critical(&self) -> usize {
        self.fronts[..self.critical_rank - 1].iter().map(Vec::len).sum()
    }
}

/// Peels non-dominated layers. Members are visited in order of decreasing
/// `(f1, f2)`, so every dominator of a member is placed before it, and a
/// layer contains a dominator of the member iff its most recently added
/// member (the one with the largest `f2`) is one.
pub fn nondominated_sort(values: &[ObjectiveValue], capacity: usize) -> Result<FrontPartition> {
    if values.is_empty() {
        return Err(LabError::EmptyPopulation);
    }
    let mut keyed: Vec<(Reverse<u64>, Reverse<u64>, usize)> = values
        .iter()
        .enumerate()
        .map(|(i, v)| (Reverse(v.f1), Reverse(v.f2), i))
        .collect();
    keyed.sort_unstable();
    let order = keyed.into_iter().map(|(_, _, i)| i);

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut tails: Vec<usize> = Vec::new();
    for i in order {
        let layer = tails
            .iter()
            .position(|&t| !values[t].strictly_dominates(&values[i]));
        match layer {
            Some(k) => {
                fronts[k].push(i);
                tails[k] = i;
            }
            None => {
                fronts.push(vec![i]);
                tails.push(i);
            }
        }
    }
    for f in fronts.iter_mut() {
        f.sort_unstable();
    }

    let mut cumulative = 0;
    let mut critical_rank = fronts.len();
    for (j, f) in fronts.iter().enumerate() {
        cumulative += f.len();
        if cumulative >= capacity {
            critical_rank = j + 1;
            break;
        }
    }
    Ok(FrontPartition {
        fronts,
        critical_rank,
    })
}

/// Crowding distances of the members of one front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrowdingAssignment {
    /// Total crowding distance per front position (may be `+inf`).
    pub distances: Vec<f64>,
    /// Per objective, front positions in stable ascending order.
    pub orders: [Vec<usize>; 2],
}

/// Per objective, sort the front stably by value; the first and last get
/// `+inf`, an interior member at sorted position `i` gets
/// `(f(y_{i+1}) - f(y_{i-1})) / (f(y_last) - f(y_first))`, or 0 when the
/// span is 0. The total is the sum over both objectives.
pub fn crowding_distance(values: &[ObjectiveValue], front: &[usize]) -> CrowdingAssignment {
    let k = front.len();
    let mut distances = vec![0.0; k];
    // (value, position) keys sort to the same order as a stable sort by value.
    let orders = [0usize, 1].map(|m| {
        let mut keyed: Vec<(u64, usize)> = front.iter().enumerate().map(|(p, &i)| (values[i].get(m), p)).collect();
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, p)| p).collect::<Vec<usize>>()
    });
    for (m, order) in orders.iter().enumerate() {
        if k == 0 {
            break;
        }
        let at = |pos: usize| values[front[order[pos]]].get(m);
        distances[order[0]] = f64::INFINITY;
        distances[order[k - 1]] = f64::INFINITY;
        let span = at(k - 1) - at(0);
        if span == 0 {
            continue;
        }
        for pos in 1..k.saturating_sub(1) {
            distances[order[pos]] += (at(pos + 1) - at(pos - 1)) as f64 / span as f64;
        }
    }
    CrowdingAssignment { distances, orders }
}

/// Survivors and removals of one survival step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivalOutcome {
    /// Surviving indices, ascending.
    pub survivors: Vec<usize>,
    /// Non-surviving indices: layers past the critical one first (ascending),
    /// then critical-front removals in removal order.
    pub removed: Vec<usize>,
}

/// Keeps all layers up to the critical rank and removes members of the
/// critical layer with the smallest crowding distance until `capacity`
/// remain. Distances are computed once and not updated between removals;
/// ties are broken uniformly.
pub fn survival(
    values: &[ObjectiveValue],
    capacity: usize,
    rng: &mut RandomSource,
) -> Result<SurvivalOutcome> {
    if values.len() <= capacity {
        return Err(LabError::precondition(format!(
            "survival needs more than {capacity} members, got {}",
            values.len()
        )));
    }
    let partition = nondominated_sort(values, capacity)?;
    let mut removed: Vec<usize> = partition.fronts[partition.critical_rank..]
        .iter()
        .flatten()
        .copied()
        .collect();
    removed.sort_unstable();

    let front = partition.critical_front();
    let excess = (partition.before_critical() + front.len()).saturating_sub(capacity);
    if excess > 0 {
        let crowding = crowding_distance(values, front);
        let mut alive: Vec<usize> = (0..front.len()).collect();
        for _ in 0..excess {
            let low = alive
                .iter()
                .map(|&p| crowding.distances[p])
                .min_by(f64::total_cmp)
                .expect("front is non-empty");
            let ties: Vec<usize> = (0..alive.len())
                .filter(|&a| crowding.distances[alive[a]] == low)
                .collect();
            let pick = if ties.len() == 1 { ties[0] } else { ties[rng.index(ties.len())] };
            removed.push(front[alive.remove(pick)]);
        }
    }

    let mut gone = vec![false; values.len()];
    for &r in &removed {
        gone[r] = true;
    }
    Ok(SurvivalOutcome {
        survivors: (0..values.len()).filter(|&i| !gone[i]).collect(),
        removed,
    })
}

/// Classic NSGA-II survival on `parents ++ offspring`.
pub fn classic_survival(
    values: &[ObjectiveValue],
    capacity: usize,
    rng: &mut RandomSource,
) -> Result<SurvivalOutcome> {
    survival(values, capacity, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nsga2Variant {
    /// `N` offspring per iteration, crowding computed once per survival step.
    Classic,
    /// One offspring per iteration.
    SteadyState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Nsga2Config {
    pub pop_size: usize,
    pub variant: Nsga2Variant,
    pub mutation: MutationKind,
}

impl Nsga2Config {
    pub fn steady_state(pop_size: usize, mutation: MutationKind) -> Self {
        Nsga2Config {
            pop_size,
            variant: Nsga2Variant::SteadyState,
            mutation,
        }
    }

    pub fn classic(pop_size: usize, mutation: MutationKind) -> Self {
        Nsga2Config {
            pop_size,
            variant: Nsga2Variant::Classic,
            mutation,
        }
    }

    pub fn offspring_count(&self) -> usize {
        match self.variant {
            Nsga2Variant::Classic => self.pop_size,
            Nsga2Variant::SteadyState => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pop_size == 0 {
            return Err(LabError::config("NSGA-II needs N >= 1"));
        }
        Ok(())
    }
}

/// One iteration: offspring from uniformly chosen parents, then survival on
/// parents (stored order) followed by offspring.
pub fn nsga2_iteration<G: Genotype>(
    pop: &Population<G>,
    cfg: &Nsga2Config,
    rng: &mut RandomSource,
) -> Result<(Population<G>, StepEvent)> {
    cfg.validate()?;
    if pop.len() != cfg.pop_size {
        return Err(LabError::precondition(format!(
            "parent population has {} members, expected {}",
            pop.len(),
            cfg.pop_size
        )));
    }
    let parents: Vec<usize> = (0..cfg.offspring_count())
        .map(|_| rng.index(cfg.pop_size))
        .collect();
    let offspring: Vec<G> = parents
        .iter()
        .map(|&p| pop.members()[p].mutate(cfg.mutation, rng))
        .collect();

    let mut combined = pop.members().to_vec();
    combined.extend(offspring.iter().cloned());
    let combined = Population::new(combined);
    let values = combined.objectives();
    let outcome = survival(&values, cfg.pop_size, rng)?;

    let event = StepEvent {
        iteration: 0,
        parent_values: parents.iter().map(|&p| values[p].f1).collect(),
        offspring_values: offspring.iter().map(|y| y.ones() as u64).collect(),
        removed: outcome
            .removed
            .iter()
            .map(|&slot| RemovedMember {
                slot,
                origin: StepEvent::origin_of(slot, cfg.pop_size),
                f1: values[slot].f1,
            })
            .collect(),
        filled: Vec::new(),
        parents,
    };
    Ok((combined.select(&outcome.survivors), event))
}

/// The steady-state iteration; crowding is fresh because it is recomputed
/// every iteration and only one member is removed.
pub fn steady_state_nsga2_iteration<G: Genotype>(
    pop: &Population<G>,
    pop_size: usize,
    mutation: MutationKind,
    rng: &mut RandomSource,
) -> Result<(Population<G>, StepEvent)> {
    nsga2_iteration(pop, &Nsga2Config::steady_state(pop_size, mutation), rng)
}

impl<G: Genotype> Stepper<G> for Nsga2Config {
    fn population_size(&self) -> usize {
        self.pop_size
    }

    fn offspring_per_step(&self) -> usize {
        self.offspring_count()
    }

    fn monitor_suite(&self, n: usize) -> MonitorSuite {
        MonitorSuite::for_nsga2(n as u64)
    }

    fn step(&self, pop: &Population<G>, rng: &mut RandomSource) -> Result<(Population<G>, StepEvent)> {
        nsga2_iteration(pop, self, rng)
    }
}

pub fn run_nsga2<G: Genotype>(
    cfg: &Nsga2Config,
    n: usize,
    init: Population<G>,
    options: &RunOptions,
    rng: &mut RandomSource,
) -> Result<TrajectoryRecord> {
    runner::run_trajectory(cfg, n, init, options, rng)
}
