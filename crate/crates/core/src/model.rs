//! Genotypes, the OneMinMax objective, dominance and populations.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::variation::{self, MutationKind, RandomSource};

const WORD_BITS: usize = 64;

/// A fixed-length bitstring with a maintained count of one-bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Individual {
    words: Vec<u64>,
    len: usize,
    ones: usize,
}

impl Individual {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "problem size must be at least 1");
        Individual {
            words: vec![0; n.div_ceil(WORD_BITS)],
            len: n,
            ones: 0,
        }
    }

    /// The sorted prefix string `1^k 0^(n-k)`.
    pub fn prefix(n: usize, k: usize) -> Self {
        assert!(k <= n, "prefix length {k} exceeds problem size {n}");
        let mut x = Individual::zeros(n);
        for w in 0..k / WORD_BITS {
            x.words[w] = u64::MAX;
        }
        if !k.is_multiple_of(WORD_BITS) {
            x.words[k / WORD_BITS] = (1u64 << (k % WORD_BITS)) - 1;
        }
        x.ones = k;
        x
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut x = Individual::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                x.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        x.ones = bits.iter().filter(|&&b| b).count();
        x
    }

    /// Uniform sample from `{0,1}^n`.
    pub fn random(n: usize, rng: &mut RandomSource) -> Self {
        let mut x = Individual::zeros(n);
        for w in x.words.iter_mut() {
            *w = rng.random::<u64>();
        }
        let tail = n % WORD_BITS;
        if tail != 0 {
            let last = x.words.len() - 1;
            x.words[last] &= (1u64 << tail) - 1;
        }
        x.ones = x.words.iter().map(|w| w.count_ones() as usize).sum();
        x
    }

    /// Uniform sample among the strings with exactly `k` ones.
    pub fn random_with_ones(n: usize, k: usize, rng: &mut RandomSource) -> Self {
        assert!(k <= n, "{k} ones do not fit in {n} bits");
        let positions = rand::seq::index::sample(rng, n, k).into_vec();
        Individual::zeros(n).with_flipped(&positions)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn ones(&self) -> usize {
        self.ones
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// Copy of `self` with every listed position flipped once.
    pub fn with_flipped(&self, positions: &[usize]) -> Self {
        let mut y = self.clone();
        for &i in positions {
            assert!(i < y.len, "flip position {i} out of range");
            let mask = 1u64 << (i % WORD_BITS);
            let word = &mut y.words[i / WORD_BITS];
            if *word & mask == 0 {
                y.ones += 1;
            } else {
                y.ones -= 1;
            }
            *word ^= mask;
        }
        y
    }
}

impl fmt::Debug for Individual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "Individual({s})")
    }
}

/// Ones-count-only genotype for OneMinMax runs.
///
/// Every quantity the algorithms look at on OneMinMax depends on the genotype only
/// through its number of ones, so this representation yields the same
/// objective-value process as [`Individual`] (in distribution).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OnesCount {
    pub ones: usize,
    pub len: usize,
}

/// What the algorithms need from a genotype.
pub trait Genotype: Clone + fmt::Debug + Send + Sync {
    fn len(&self) -> usize;
    fn ones(&self) -> usize;
    /// Canonical genotype with `k` ones out of `n`.
    fn with_ones(n: usize, k: usize) -> Self;
    fn random(n: usize, rng: &mut RandomSource) -> Self;
    fn mutate(&self, kind: MutationKind, rng: &mut RandomSource) -> Self;
}

impl Genotype for Individual {
    fn len(&self) -> usize {
        self.len
    }

    fn ones(&self) -> usize {
        self.ones
    }

    fn with_ones(n: usize, k: usize) -> Self {
        Individual::prefix(n, k)
    }

    fn random(n: usize, rng: &mut RandomSource) -> Self {
        Individual::random(n, rng)
    }

    fn mutate(&self, kind: MutationKind, rng: &mut RandomSource) -> Self {
        match kind {
            MutationKind::OneBit => variation::one_bit_mutation(self, rng),
            MutationKind::StandardBit => variation::standard_bit_mutation(self, rng),
        }
    }
}

impl Genotype for OnesCount {
    fn len(&self) -> usize {
        self.len
    }

    fn ones(&self) -> usize {
        self.ones
    }

    fn with_ones(n: usize, k: usize) -> Self {
        assert!(k <= n);
        OnesCount { ones: k, len: n }
    }

    fn random(n: usize, rng: &mut RandomSource) -> Self {
        assert!(n >= 1);
        let ones = (0..n).filter(|_| rng.random::<bool>()).count();
        OnesCount { ones, len: n }
    }

    fn mutate(&self, kind: MutationKind, rng: &mut RandomSource) -> Self {
        let ones = variation::ones_count_transition(self.ones, self.len, kind, rng)
            .expect("ones count is always within range");
        OnesCount { ones, len: self.len }
    }
}

/// A bi-objective value under maximisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub f1: u64,
    pub f2: u64,
}

impl ObjectiveValue {
    pub const fn new(f1: u64, f2: u64) -> Self {
        ObjectiveValue { f1, f2 }
    }

    #[inline]
    pub fn get(&self, objective: usize) -> u64 {
        match objective {
            0 => self.f1,
            1 => self.f2,
            _ => panic!("objective index {objective} out of range"),
        }
    }

    pub fn weakly_dominates(&self, other: &ObjectiveValue) -> bool {
        self.f1 >= other.f1 && self.f2 >= other.f2
    }

    pub fn strictly_dominates(&self, other: &ObjectiveValue) -> bool {
        self.weakly_dominates(other) && self != other
    }
}

/// OneMinMax: `(ones, n - ones)`.
#[inline]
pub fn evaluate_omm<G: Genotype>(x: &G) -> ObjectiveValue {
    let ones = x.ones() as u64;
    ObjectiveValue::new(ones, x.len() as u64 - ones)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DominanceRelation {
    /// The first value strictly dominates the second.
    FirstStrict,
    /// The second value strictly dominates the first.
    SecondStrict,
    /// Both values are equal.
    MutuallyWeak,
    Incomparable,
}

pub fn compare_dominance(u: &ObjectiveValue, v: &ObjectiveValue) -> DominanceRelation {
    match (u.f1.cmp(&v.f1), u.f2.cmp(&v.f2)) {
        (Ordering::Equal, Ordering::Equal) => DominanceRelation::MutuallyWeak,
        (a, b) if a != Ordering::Less && b != Ordering::Less => DominanceRelation::FirstStrict,
        (a, b) if a != Ordering::Greater && b != Ordering::Greater => {
            DominanceRelation::SecondStrict
        }
        _ => DominanceRelation::Incomparable,
    }
}

/// Indices of the members not strictly dominated by any other member.
/// Duplicates are kept.
pub fn non_dominated_indices(values: &[ObjectiveValue]) -> Result<Vec<usize>> {
    if values.is_empty() {
        return Err(LabError::EmptyPopulation);
    }
    Ok((0..values.len())
        .filter(|&i| !values.iter().any(|v| v.strictly_dominates(&values[i])))
        .collect())
}

/// Number of distinct values in a multiset of objective values.
pub fn distinct_count(values: &[ObjectiveValue]) -> usize {
    values.iter().collect::<BTreeSet<_>>().len()
}

/// A multiset of genotypes. Member order is meaningful: it is the base order
/// for stable sorts and for enumerating tie-break candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population<G> {
    members: Vec<G>,
}

impl<G: Genotype> Population<G> {
    pub fn new(members: Vec<G>) -> Self {
        Population { members }
    }

    pub fn random(n: usize, size: usize, rng: &mut RandomSource) -> Self {
        Population::new((0..size).map(|_| G::random(n, rng)).collect())
    }

    /// Canonical genotypes for the given ones-counts, in the given order.
    pub fn from_f1_values(n: usize, values: &[u64]) -> Result<Self> {
        values
            .iter()
            .map(|&k| {
                if k as usize > n {
                    Err(LabError::precondition(format!(
                        "objective value {k} exceeds problem size {n}"
                    )))
                } else {
                    Ok(G::with_ones(n, k as usize))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Population::new)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[G] {
        &self.members
    }

    pub fn into_members(self) -> Vec<G> {
        self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, G> {
        self.members.iter()
    }

    pub fn objectives(&self) -> Vec<ObjectiveValue> {
        self.members.iter().map(evaluate_omm).collect()
    }

    /// First objective of every member, in member order.
    pub fn f1_values(&self) -> Vec<u64> {
        self.members.iter().map(|x| x.ones() as u64).collect()
    }

    pub fn distinct_objective_count(&self) -> usize {
        distinct_count(&self.objectives())
    }

    pub fn non_dominated(&self) -> Result<Population<G>> {
        let keep = non_dominated_indices(&self.objectives())?;
        Ok(self.select(&keep))
    }

    /// Sub-population of the listed member indices, in the listed order.
    pub fn select(&self, indices: &[usize]) -> Population<G> {
        Population::new(indices.iter().map(|&i| self.members[i].clone()).collect())
    }

    pub fn contains_value(&self, f1: u64) -> bool {
        self.members.iter().any(|x| x.ones() as u64 == f1)
    }
}

/// Where a member of the combined parent+offspring population came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Parent(usize),
    Offspring(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedMember {
    /// Index into the combined population (parents first, then offspring).
    pub slot: usize,
    pub origin: Origin,
    pub f1: u64,
}

/// What happened in one iteration, for the invariant monitors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub iteration: u64,
    /// Parent index (into the parent population) of each offspring.
    pub parents: Vec<usize>,
    pub parent_values: Vec<u64>,
    pub offspring_values: Vec<u64>,
    /// Every combined-population member not carried over, in removal order.
    pub removed: Vec<RemovedMember>,
    /// Members re-added by the strength-based fill (combined slots).
    pub filled: Vec<usize>,
}

impl StepEvent {
    pub(crate) fn origin_of(slot: usize, parents: usize) -> Origin {
        if slot < parents {
            Origin::Parent(slot)
        } else {
            Origin::Offspring(slot - parents)
        }
    }
}
