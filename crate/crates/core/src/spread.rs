//! Interval profiles of a population on the OneMinMax front and the
//! optimal-spread target.
//!
//! With the members sorted by their number of ones, `L_i` is the gap between
//! the `i`-th and `(i+1)`-th value. The profile records the smallest gap `X`,
//! how many gaps attain it (`N_min`), the largest gap `Y` and its multiplicity
//! (`M_max`). The profile is only meaningful when the values are pairwise
//! distinct and both extremes `0` and `n` are present.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model::{Genotype, Population};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileStatus {
    Defined,
    /// Some objective value occurs more than once.
    Duplicates,
    /// Values are distinct but `0` or `n` is missing.
    MissingExtremes,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalProfile {
    pub status: ProfileStatus,
    /// Distinct first-objective values, ascending.
    pub sorted_values: Vec<u64>,
    /// Consecutive gaps; empty unless the profile is defined.
    pub gaps: Vec<u64>,
    pub min_gap: u64,
    pub min_count: usize,
    pub max_gap: u64,
    pub max_count: usize,
}

impl IntervalProfile {
    #[inline]
    pub fn is_defined(&self) -> bool {
        self.status == ProfileStatus::Defined
    }

    /// `(-X, N_min)`, which the steady-state SPEA2 never increases.
    pub fn lex_key_min(&self) -> Result<(i64, usize)> {
        self.require_defined()?;
        Ok((-(self.min_gap as i64), self.min_count))
    }

    /// `(Y, M_max)`, which the steady-state SPEA2 never increases.
    pub fn lex_key_max(&self) -> Result<(u64, usize)> {
        self.require_defined()?;
        Ok((self.max_gap, self.max_count))
    }

    pub fn first_gap(&self) -> Option<u64> {
        self.gaps.first().copied()
    }

    pub fn last_gap(&self) -> Option<u64> {
        self.gaps.last().copied()
    }

    fn require_defined(&self) -> Result<()> {
        match self.status {
            ProfileStatus::Defined => Ok(()),
            ProfileStatus::Duplicates => Err(LabError::UndefinedProfile("duplicate values")),
            ProfileStatus::MissingExtremes => Err(LabError::UndefinedProfile("missing extremes")),
        }
    }
}

/// Profile of a multiset of first-objective values on a problem of size `n`.
pub fn interval_profile(f1_values: &[u64], n: u64) -> IntervalProfile {
    let mut sorted = f1_values.to_vec();
    sorted.sort_unstable();
    let before = sorted.len();
    sorted.dedup();

    let undefined = |status| IntervalProfile {
        status,
        sorted_values: sorted.clone(),
        gaps: Vec::new(),
        min_gap: 0,
        min_count: 0,
        max_gap: 0,
        max_count: 0,
    };
    if sorted.len() != before {
        return undefined(ProfileStatus::Duplicates);
    }
    if sorted.len() < 2 || sorted[0] != 0 || *sorted.last().unwrap() != n {
        return undefined(ProfileStatus::MissingExtremes);
    }

    let gaps: Vec<u64> = sorted.windows(2).map(|w| w[1] - w[0]).collect();
    let min_gap = *gaps.iter().min().unwrap();
    let max_gap = *gaps.iter().max().unwrap();
    IntervalProfile {
        status: ProfileStatus::Defined,
        min_count: gaps.iter().filter(|&&g| g == min_gap).count(),
        max_count: gaps.iter().filter(|&&g| g == max_gap).count(),
        sorted_values: sorted,
        gaps,
        min_gap,
        max_gap,
    }
}

pub fn population_profile<G: Genotype>(pop: &Population<G>, n: usize) -> IntervalProfile {
    interval_profile(&pop.f1_values(), n as u64)
}

/// `alpha = floor(n / (mu - 1))` and the number `beta` of gaps of length
/// `alpha` in an optimal spread: `alpha*beta + (alpha+1)*(mu-1-beta) = n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: u64,
    pub beta: u64,
}

pub fn alpha_beta(n: u64, mu: u64) -> Result<AlphaBeta> {
    if mu < 2 || mu > n {
        return Err(LabError::precondition(format!(
            "population size {mu} outside [2, {n}]"
        )));
    }
    let intervals = mu - 1;
    let alpha = n / intervals;
    let beta = (alpha + 1) * intervals - n;
    Ok(AlphaBeta { alpha, beta })
}

/// True iff both extremes are present, all values are distinct and every gap
/// is `floor(n/(mu-1))` or `ceil(n/(mu-1))`.
pub fn is_optimal_spread(f1_values: &[u64], n: u64) -> bool {
    let profile = interval_profile(f1_values, n);
    profile_is_optimal(&profile, n)
}

pub fn profile_is_optimal(profile: &IntervalProfile, n: u64) -> bool {
    if !profile.is_defined() {
        return false;
    }
    let Ok(ab) = alpha_beta(n, profile.sorted_values.len() as u64) else {
        return false;
    };
    profile
        .gaps
        .iter()
        .all(|&g| g == ab.alpha || g == ab.alpha + 1)
}
