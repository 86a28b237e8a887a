//! Exact one-step successor distributions of the steady-state algorithms on
//! small instances, by enumeration.
//!
//! A state is the parent multiset of first-objective values, stored sorted;
//! the parents are laid out in that order and the offspring is appended, as
//! in the simulated runs. Enumerated: the uniform parent, the uniform flip
//! position of one-bit mutation, and every uniform tie-break of the removal.
//! The removal rules are restated here on integers, independently of the
//! survival code they cross-check: SPEA2 compares integer distance vectors,
//! NSGA-II compares integer crowding numerators over the common span.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::harness::experiment::AlgorithmKind;
use crate::model::{Individual, Population};
use crate::nsga2::nsga2_iteration;
use crate::nsga2::Nsga2Config;
use crate::spea2::{spea2_iteration, Spea2Config};
use crate::variation::{MutationKind, RandomSource};

pub const MAX_N: usize = 8;
pub const MAX_POPULATION: usize = 4;

/// Probability of each successor multiset (sorted values).
pub type Distribution = BTreeMap<Vec<u64>, f64>;

fn check(state: &[u64], algorithm: AlgorithmKind, n: usize) -> Result<()> {
    if !algorithm.is_steady_state() {
        return Err(LabError::precondition(format!(
            "the oracle covers the steady-state algorithms only, not {algorithm}"
        )));
    }
    if n == 0 || state.is_empty() {
        return Err(LabError::precondition("empty state or problem"));
    }
    if n > MAX_N || state.len() > MAX_POPULATION {
        return Err(LabError::InstanceTooLarge(format!(
            "n = {n}, population {} (limits {MAX_N} and {MAX_POPULATION})",
            state.len()
        )));
    }
    if let Some(v) = state.iter().find(|&&v| v > n as u64) {
        return Err(LabError::precondition(format!("value {v} exceeds n = {n}")));
    }
    Ok(())
}

/// Candidates for removal from `combined`, each with its probability.
pub fn removal_distribution(combined: &[u64], algorithm: AlgorithmKind) -> Vec<(usize, f64)> {
    let candidates = if algorithm.is_spea2() {
        sigma_candidates(combined)
    } else {
        crowding_candidates(combined)
    };
    let p = 1.0 / candidates.len() as f64;
    candidates.into_iter().map(|i| (i, p)).collect()
}

/// Members whose ascending distance vector is lexicographically smallest.
fn sigma_candidates(values: &[u64]) -> Vec<usize> {
    let sigma: Vec<Vec<u64>> = (0..values.len())
        .map(|i| {
            let mut d: Vec<u64> = (0..values.len())
                .filter(|&j| j != i)
                .map(|j| values[i].abs_diff(values[j]))
                .collect();
            d.sort_unstable();
            d
        })
        .collect();
    let best = sigma.iter().min().expect("non-empty");
    (0..values.len()).filter(|&i| sigma[i] == *best).collect()
}

/// Members of smallest crowding. Both objectives span the same range on
/// OneMinMax, so the sum of neighbour differences decides.
fn crowding_candidates(values: &[u64]) -> Vec<usize> {
    let k = values.len();
    const INF: u64 = u64::MAX;
    let mut score = vec![0u64; k];
    let span = values.iter().max().unwrap() - values.iter().min().unwrap();
    // first objective ascending, then second objective ascending (first
    // descending); both sorts keep equal members in their stored order
    let mut up: Vec<usize> = (0..k).collect();
    up.sort_by_key(|&i| values[i]);
    let mut down: Vec<usize> = (0..k).collect();
    down.sort_by_key(|&i| std::cmp::Reverse(values[i]));
    for order in [&up, &down] {
        score[order[0]] = INF;
        score[order[k - 1]] = INF;
        if span == 0 {
            continue;
        }
        for pos in 1..k.saturating_sub(1) {
            let i = order[pos];
            if score[i] != INF {
                score[i] += values[order[pos + 1]].abs_diff(values[order[pos - 1]]);
            }
        }
    }
    let low = *score.iter().min().unwrap();
    (0..k).filter(|&i| score[i] == low).collect()
}

/// Exact successor distribution of `state` under one iteration with one-bit
/// mutation.
pub fn exact_transition_oracle(state: &[u64], algorithm: AlgorithmKind, n: usize) -> Result<Distribution> {
    check(state, algorithm, n)?;
    let mut parents = state.to_vec();
    parents.sort_unstable();
    let mu = parents.len() as f64;
    let mut dist = Distribution::new();
    for &k in &parents {
        let moves = [(k.checked_sub(1), k as f64 / n as f64), (Some(k + 1), (n as u64 - k) as f64 / n as f64)];
        for (child, p_flip) in moves {
            let Some(child) = child.filter(|&c| c <= n as u64) else {
                continue;
            };
            if p_flip == 0.0 {
                continue;
            }
            let mut combined = parents.clone();
            combined.push(child);
            for (victim, p_remove) in removal_distribution(&combined, algorithm) {
                let mut next = combined.clone();
                next.remove(victim);
                next.sort_unstable();
                *dist.entry(next).or_insert(0.0) += p_flip * p_remove / mu;
            }
        }
    }
    Ok(dist)
}

/// Empirical successor distribution from `samples` independent iterations
/// of the simulated algorithm on bitstrings, started from the sorted state.
pub fn monte_carlo_successors(
    state: &[u64],
    algorithm: AlgorithmKind,
    n: usize,
    samples: usize,
    rng: &mut RandomSource,
) -> Result<Distribution> {
    check(state, algorithm, n)?;
    let mut parents = state.to_vec();
    parents.sort_unstable();
    let pop = Population::<Individual>::from_f1_values(n, &parents)?;
    let mu = parents.len();
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for _ in 0..samples {
        let (next, _) = if algorithm.is_spea2() {
            spea2_iteration(&pop, &Spea2Config::steady_state(mu, MutationKind::OneBit), rng)?
        } else {
            nsga2_iteration(&pop, &Nsga2Config::steady_state(mu, MutationKind::OneBit), rng)?
        };
        let mut v = next.f1_values();
        v.sort_unstable();
        *counts.entry(v).or_insert(0) += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / samples as f64))
        .collect())
}

pub fn total_variation(a: &Distribution, b: &Distribution) -> f64 {
    let mut sum = 0.0;
    for (k, p) in a {
        sum += (p - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, q) in b {
        if !a.contains_key(k) {
            sum += q;
        }
    }
    sum / 2.0
}

/// Every multiset of `mu` values from `0..=n`, each sorted ascending.
pub fn all_states(n: usize, mu: usize) -> Vec<Vec<u64>> {
    fn extend(from: u64, n: u64, left: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for v in from..=n {
            cur.push(v);
            extend(v, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, n as u64, mu, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckRow {
    pub state: Vec<u64>,
    pub successors: usize,
    pub total_variation: f64,
    pub passed: bool,
}

/// Compares Monte Carlo to the oracle on every state of size `mu` with
/// values in `0..=n`. State `i` uses stream `i` of `seed`.
pub fn oracle_check(
    algorithm: AlgorithmKind,
    n: usize,
    mu: usize,
    samples: usize,
    tolerance: f64,
    seed: u64,
) -> Result<Vec<OracleCheckRow>> {
    check(&vec![0; mu], algorithm, n)?;
    all_states(n, mu)
        .into_par_iter()
        .enumerate()
        .map(|(i, state)| {
            let exact = exact_transition_oracle(&state, algorithm, n)?;
            let mut rng = RandomSource::new(seed, i as u64);
            let empirical = monte_carlo_successors(&state, algorithm, n, samples, &mut rng)?;
            let tv = total_variation(&exact, &empirical);
            Ok(OracleCheckRow {
                successors: exact.len(),
                total_variation: tv,
                passed: tv <= tolerance,
                state,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SS: AlgorithmKind = AlgorithmKind::Spea2SteadyState;
    const NS: AlgorithmKind = AlgorithmKind::Nsga2SteadyState;

    fn sums_to_one(d: &Distribution) {
        let s: f64 = d.values().sum();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn duplicate_offspring_is_removed() {
        // the offspring 2 duplicates a parent; one of the two copies goes
        assert_eq!(sigma_candidates(&[0, 2, 4, 2]), vec![1, 3]);
        for (victim, _) in removal_distribution(&[0, 2, 4, 2], SS) {
            let mut next = vec![0, 2, 4, 2];
            next.remove(victim);
            next.sort_unstable();
            assert_eq!(next, vec![0, 2, 4]);
        }
    }

    #[test]
    fn spea2_state_014() {
        let d = exact_transition_oracle(&[0, 1, 4], SS, 4).unwrap();
        sums_to_one(&d);
        // parent 0 -> 1 duplicates; parent 1 -> 0 or 2; parent 4 -> 3
        // {0,1,4}+1: remove a 1 -> {0,1,4}
        // {0,1,4}+0: remove a 0 -> {0,1,4}
        // {0,1,4}+2: sigma(1) = (1,1,3), sigma(2) = (1,2,2) -> remove 1 -> {0,2,4}
        // {0,1,4}+3: sigma(1)=(1,2,3), sigma(3)=(1,2,3): tie -> {0,3,4} or {0,1,4}
        let p_014 = d[&vec![0, 1, 4]];
        let p_024 = d[&vec![0, 2, 4]];
        let p_034 = d[&vec![0, 3, 4]];
        let third = 1.0 / 3.0;
        assert!((p_024 - third * 0.75).abs() < 1e-12);
        assert!((p_034 - third * 0.5).abs() < 1e-12);
        assert!((p_014 - (third + third * 0.25 + third * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn nsga2_keeps_extremes() {
        let d = exact_transition_oracle(&[0, 2, 4], NS, 4).unwrap();
        sums_to_one(&d);
        assert!(d.keys().all(|s| s.contains(&0) && s.contains(&4)));
    }

    #[test]
    fn crowding_with_duplicates() {
        // stable orders: the first 1 is interior in both objectives
        assert_eq!(crowding_candidates(&[0, 1, 1, 4]), vec![1, 2]);
        // middle copy of a triple has zero crowding
        assert_eq!(crowding_candidates(&[0, 2, 2, 2, 5]), vec![2]);
        // all equal: every member is an extreme in some objective, or zero
        assert_eq!(crowding_candidates(&[3, 3, 3]), vec![1]);
    }

    #[test]
    fn limits() {
        assert!(matches!(
            exact_transition_oracle(&[0, 1, 2], SS, 9),
            Err(LabError::InstanceTooLarge(_))
        ));
        assert!(exact_transition_oracle(&[0, 1, 2, 3, 4], SS, 6).is_err());
        assert!(exact_transition_oracle(&[0, 1, 2], AlgorithmKind::Nsga2Classic, 6).is_err());
    }

    #[test]
    fn state_enumeration() {
        assert_eq!(all_states(6, 3).len(), 84);
        assert_eq!(all_states(1, 3).len(), 4);
    }

    #[test]
    fn total_variation_basics() {
        let a: Distribution = [(vec![0], 0.5), (vec![1], 0.5)].into();
        let b: Distribution = [(vec![0], 1.0)].into();
        assert!((total_variation(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(total_variation(&a, &a), 0.0);
    }

    #[test]
    fn monte_carlo_matches_small_case() {
        let mut rng = RandomSource::new(17, 0);
        for alg in [SS, NS] {
            let exact = exact_transition_oracle(&[0, 1, 4], alg, 4).unwrap();
            let mc = monte_carlo_successors(&[0, 1, 4], alg, 4, 40_000, &mut rng).unwrap();
            assert!(total_variation(&exact, &mc) < 0.015, "{alg}");
        }
    }
}
