//! SPEA2 environmental selection and iteration.
//!
//! Survival keeps the non-dominated members of parents and offspring. Surplus
//! members are removed one at a time by lexicographically smallest
//! σ-vector (the ascending distances to every other member), recomputing the
//! vectors after each removal. A shortfall is filled from the dominated
//! members by their strength-based indicator.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::record::TrajectoryRecord;
use crate::harness::runner::{self, RunOptions, Stepper};
use crate::invariants::MonitorSuite;
use crate::model::{
    non_dominated_indices, Genotype, ObjectiveValue, Population, StepEvent,
};
use crate::variation::{MutationKind, RandomSource};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    /// Euclidean distance of the two objective vectors.
    #[default]
    EuclideanBiObjective,
    /// `|f1(x) - f1(y)|`; induces the same order as the Euclidean metric on OneMinMax.
    FirstObjectiveAbsolute,
}

impl DistanceMetric {
    pub fn distance(self, a: &ObjectiveValue, b: &ObjectiveValue) -> f64 {
        let d1 = a.f1.abs_diff(b.f1);
        match self {
            DistanceMetric::FirstObjectiveAbsolute => d1 as f64,
            DistanceMetric::EuclideanBiObjective => {
                let d2 = a.f2.abs_diff(b.f2);
                ((d1 * d1 + d2 * d2) as f64).sqrt()
            }
        }
    }
}

/// Ascending distances from one member to every other member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaVector(pub Vec<f64>);

impl SigmaVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn lex_cmp(&self, other: &SigmaVector) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

pub fn sigma_vector(
    values: &[ObjectiveValue],
    member: usize,
    metric: DistanceMetric,
) -> Result<SigmaVector> {
    if values.len() < 2 {
        return Err(LabError::PopulationTooSmall {
            size: values.len(),
            required: 2,
        });
    }
    if member >= values.len() {
        return Err(LabError::precondition(format!(
            "member {member} not in population of size {}",
            values.len()
        )));
    }
    Ok(sigma_of(values, member, (0..values.len()).collect::<Vec<_>>().as_slice(), metric))
}

fn sigma_of(
    values: &[ObjectiveValue],
    member: usize,
    alive: &[usize],
    metric: DistanceMetric,
) -> SigmaVector {
    let mut d: Vec<f64> = alive
        .iter()
        .filter(|&&j| j != member)
        .map(|&j| metric.distance(&values[member], &values[j]))
        .collect();
    d.sort_by(f64::total_cmp);
    SigmaVector(d)
}

/// Members of `alive` whose σ-vector (within `alive`) is lexicographically
/// minimal, by building every vector in full. Result is ascending.
pub fn sigma_minimizers_exhaustive(
    values: &[ObjectiveValue],
    alive: &[usize],
    metric: DistanceMetric,
) -> Vec<usize> {
    let sigmas: Vec<(usize, SigmaVector)> = alive
        .iter()
        .map(|&i| (i, sigma_of(values, i, alive, metric)))
        .collect();
    let mut best: Vec<usize> = Vec::new();
    let mut best_sigma: Option<&SigmaVector> = None;
    for (i, s) in &sigmas {
        match best_sigma.map(|b| s.lex_cmp(b)) {
            None | Some(Ordering::Less) => {
                best.clear();
                best.push(*i);
                best_sigma = Some(s);
            }
            Some(Ordering::Equal) => best.push(*i),
            Some(Ordering::Greater) => {}
        }
    }
    best.sort_unstable();
    best
}

/// Ascending distances of one member of a sorted value list, produced lazily by
/// merging its left and right neighbours.
struct SortedSigma<'a> {
    sorted: &'a [u64],
    pos: usize,
    left: usize,
    right: usize,
}

impl<'a> SortedSigma<'a> {
    fn new(sorted: &'a [u64], pos: usize) -> Self {
        SortedSigma {
            sorted,
            pos,
            left: pos,
            right: pos + 1,
        }
    }
}

impl Iterator for SortedSigma<'_> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let v = self.sorted[self.pos];
        let l = (self.left > 0).then(|| v - self.sorted[self.left - 1]);
        let r = (self.right < self.sorted.len()).then(|| self.sorted[self.right] - v);
        match (l, r) {
            (Some(a), Some(b)) if a <= b => {
                self.left -= 1;
                Some(a)
            }
            (_, Some(b)) => {
                self.right += 1;
                Some(b)
            }
            (Some(a), None) => {
                self.left -= 1;
                Some(a)
            }
            (None, None) => None,
        }
    }
}

fn sorted_sigma_cmp(sorted: &[u64], a: usize, b: usize) -> Ordering {
    let mut x = SortedSigma::new(sorted, a);
    let mut y = SortedSigma::new(sorted, b);
    loop {
        match (x.next(), y.next()) {
            (Some(p), Some(q)) => match p.cmp(&q) {
                Ordering::Equal => continue,
                ord => return ord,
            },
            _ => return Ordering::Equal,
        }
    }
}

/// Same result as [`sigma_minimizers_exhaustive`] for values lying on one
/// anti-diagonal `f1 + f2 = const` (all OneMinMax populations), where both
/// metrics are proportional to `|Δf1|`. Vectors are compared lazily on the
/// sorted values and usually differ within the first few entries.
pub fn sigma_minimizers_sorted(values: &[ObjectiveValue], alive: &[usize]) -> Vec<usize> {
    let mut order: Vec<(u64, usize)> = alive.iter().map(|&i| (values[i].f1, i)).collect();
    order.sort_unstable();
    let sorted: Vec<u64> = order.iter().map(|&(v, _)| v).collect();

    let mut best: Vec<usize> = vec![0];
    for pos in 1..sorted.len() {
        match sorted_sigma_cmp(&sorted, pos, best[0]) {
            Ordering::Less => {
                best.clear();
                best.push(pos);
            }
            Ordering::Equal => best.push(pos),
            Ordering::Greater => {}
        }
    }
    let mut out: Vec<usize> = best.into_iter().map(|p| order[p].1).collect();
    out.sort_unstable();
    out
}

fn on_one_antidiagonal(values: &[ObjectiveValue], alive: &[usize]) -> bool {
    let mut sums = alive.iter().map(|&i| values[i].f1 + values[i].f2);
    match sums.next() {
        Some(first) => sums.all(|s| s == first),
        None => true,
    }
}

fn sigma_minimizers(values: &[ObjectiveValue], alive: &[usize], metric: DistanceMetric) -> Vec<usize> {
    if on_one_antidiagonal(values, alive) {
        sigma_minimizers_sorted(values, alive)
    } else {
        sigma_minimizers_exhaustive(values, alive, metric)
    }
}

/// Removes members until `mu` remain and returns the removed indices in
/// removal order. Ties among lexicographic minimisers are broken uniformly,
/// enumerating the minimisers in index order.
pub fn truncate_by_sigma(
    values: &[ObjectiveValue],
    mu: usize,
    metric: DistanceMetric,
    rng: &mut RandomSource,
) -> Result<Vec<usize>> {
    if values.len() <= mu {
        return Err(LabError::precondition(format!(
            "truncation needs more than {mu} members, got {}",
            values.len()
        )));
    }
    if non_dominated_indices(values)?.len() != values.len() {
        return Err(LabError::precondition(
            "truncation is only defined on mutually non-dominated members",
        ));
    }
    let mut alive: Vec<usize> = (0..values.len()).collect();
    let mut removed = Vec::with_capacity(values.len() - mu);
    while alive.len() > mu {
        let candidates = sigma_minimizers(values, &alive, metric);
        let victim = if candidates.len() == 1 {
            candidates[0]
        } else {
            candidates[rng.index(candidates.len())]
        };
        alive.retain(|&i| i != victim);
        removed.push(victim);
    }
    Ok(removed)
}

/// Strength of `y`: the number of members it weakly dominates (itself included).
/// Indicator of `x`: the summed strength of the members strictly dominating it.
pub fn strength_indicators(values: &[ObjectiveValue], members: &[usize]) -> Vec<u64> {
    let strength: Vec<u64> = members
        .iter()
        .map(|&y| {
            members
                .iter()
                .filter(|&&z| values[y].weakly_dominates(&values[z]))
                .count() as u64
        })
        .collect();
    members
        .iter()
        .map(|&x| {
            members
                .iter()
                .zip(&strength)
                .filter(|(&y, _)| values[y].strictly_dominates(&values[x]))
                .map(|(_, &s)| s)
                .sum()
        })
        .collect()
}

/// Adds members of `pool` in ascending indicator order (uniform among ties)
/// until `kept` has `mu` members. Returns the added indices in order.
/// Indicators are computed once over `kept ∪ pool`.
pub fn strength_fill(
    values: &[ObjectiveValue],
    kept: &[usize],
    pool: &[usize],
    mu: usize,
    rng: &mut RandomSource,
) -> Result<Vec<usize>> {
    if kept.len() >= mu {
        return Err(LabError::precondition(format!(
            "fill needs fewer than {mu} kept members, got {}",
            kept.len()
        )));
    }
    if kept.len() + pool.len() < mu {
        return Err(LabError::precondition(format!(
            "cannot fill to {mu} from {} kept and {} pooled members",
            kept.len(),
            pool.len()
        )));
    }
    let everyone: Vec<usize> = kept.iter().chain(pool).copied().collect();
    let indicators = strength_indicators(values, &everyone);
    let mut remaining: Vec<(u64, usize)> = indicators[kept.len()..]
        .iter()
        .copied()
        .zip(pool.iter().copied())
        .collect();

    let mut added = Vec::with_capacity(mu - kept.len());
    while kept.len() + added.len() < mu {
        let low = remaining.iter().map(|&(r, _)| r).min().expect("pool is large enough");
        let ties: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(_, &(r, _))| r == low)
            .map(|(pos, _)| pos)
            .collect();
        let pick = if ties.len() == 1 { ties[0] } else { ties[rng.index(ties.len())] };
        added.push(remaining.remove(pick).1);
    }
    Ok(added)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spea2Config {
    pub mu: usize,
    pub lambda: usize,
    pub mutation: MutationKind,
    pub metric: DistanceMetric,
}

impl Spea2Config {
    pub fn steady_state(mu: usize, mutation: MutationKind) -> Self {
        Spea2Config {
            mu,
            lambda: 1,
            mutation,
            metric: DistanceMetric::FirstObjectiveAbsolute,
        }
    }

    pub fn is_steady_state(&self) -> bool {
        self.lambda == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu == 0 || self.lambda == 0 {
            return Err(LabError::config("SPEA2 needs mu >= 1 and lambda >= 1"));
        }
        Ok(())
    }
}

/// One generation: `lambda` offspring from uniformly chosen parents, then
/// survival on parents followed by offspring.
pub fn spea2_iteration<G: Genotype>(
    pop: &Population<G>,
    cfg: &Spea2Config,
    rng: &mut RandomSource,
) -> Result<(Population<G>, StepEvent)> {
    cfg.validate()?;
    if pop.len() != cfg.mu {
        return Err(LabError::precondition(format!(
            "parent population has {} members, expected {}",
            pop.len(),
            cfg.mu
        )));
    }
    let parents: Vec<usize> = (0..cfg.lambda).map(|_| rng.index(cfg.mu)).collect();
    let offspring: Vec<G> = parents
        .iter()
        .map(|&p| pop.members()[p].mutate(cfg.mutation, rng))
        .collect();

    let mut combined = pop.members().to_vec();
    combined.extend(offspring.iter().cloned());
    let combined = Population::new(combined);
    let values = combined.objectives();

    let front = non_dominated_indices(&values)?;
    let mut removed_slots: Vec<usize> = Vec::new();
    let mut filled = Vec::new();
    let mut survives = vec![false; values.len()];

    if front.len() > cfg.mu {
        let sub: Vec<ObjectiveValue> = front.iter().map(|&i| values[i]).collect();
        let gone = truncate_by_sigma(&sub, cfg.mu, cfg.metric, rng)?;
        for &i in &front {
            survives[i] = true;
        }
        for g in gone {
            survives[front[g]] = false;
            removed_slots.push(front[g]);
        }
    } else {
        for &i in &front {
            survives[i] = true;
        }
        if front.len() < cfg.mu {
            let pool: Vec<usize> = (0..values.len()).filter(|&i| !survives[i]).collect();
            filled = strength_fill(&values, &front, &pool, cfg.mu, rng)?;
            for &i in &filled {
                survives[i] = true;
            }
        }
    }

    // dominated members that were not refilled go first, in slot order
    let mut removed: Vec<usize> = (0..values.len())
        .filter(|&i| !survives[i] && !removed_slots.contains(&i))
        .collect();
    removed.extend(removed_slots);

    let keep: Vec<usize> = (0..values.len()).filter(|&i| survives[i]).collect();
    let next = combined.select(&keep);
    let event = StepEvent {
        iteration: 0,
        parent_values: parents.iter().map(|&p| values[p].f1).collect(),
        offspring_values: offspring.iter().map(|y| y.ones() as u64).collect(),
        removed: removed
            .into_iter()
            .map(|slot| crate::model::RemovedMember {
                slot,
                origin: StepEvent::origin_of(slot, cfg.mu),
                f1: values[slot].f1,
            })
            .collect(),
        filled,
        parents,
    };
    Ok((next, event))
}

impl<G: Genotype> Stepper<G> for Spea2Config {
    fn population_size(&self) -> usize {
        self.mu
    }

    fn offspring_per_step(&self) -> usize {
        self.lambda
    }

    fn monitor_suite(&self, n: usize) -> MonitorSuite {
        MonitorSuite::for_spea2(n as u64, self.mu, self.lambda, self.mutation)
    }

    fn step(&self, pop: &Population<G>, rng: &mut RandomSource) -> Result<(Population<G>, StepEvent)> {
        spea2_iteration(pop, self, rng)
    }
}

/// Iterates [`spea2_iteration`] from `init` until the stop rule fires.
pub fn run_spea2<G: Genotype>(
    cfg: &Spea2Config,
    n: usize,
    init: Population<G>,
    options: &RunOptions,
    rng: &mut RandomSource,
) -> Result<TrajectoryRecord> {
    runner::run_trajectory(cfg, n, init, options, rng)
}
