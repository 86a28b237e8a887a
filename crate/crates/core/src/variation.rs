//! Seeded randomness and the two mutation operators.
//!
//! Each replication owns one [`RandomSource`]. Within an iteration draws are
//! consumed in a fixed order: all parent choices first, then the mutation of
//! each offspring in turn, then the tie-breaks of the survival step. Replaying
//! the same `(seed, stream)` therefore replays the trajectory bit for bit.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model::Individual;

/// A ChaCha8 stream identified by `(seed, stream)`; portable across platforms.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RandomSource { seed, stream, rng }
    }

    /// The stream used for replication `seed` of an experiment.
    pub fn for_replication(seed: u64) -> Self {
        RandomSource::new(seed, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform index in `0..len`. Samples through `u64` so the result does not
    /// depend on the platform's pointer width.
    #[inline]
    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        self.rng.random_range(0..len as u64) as usize
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    /// Flip exactly one uniformly chosen bit.
    OneBit,
    /// Flip each bit independently with probability `1/n`.
    StandardBit,
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MutationKind::OneBit => "one-bit",
            MutationKind::StandardBit => "standard-bit",
        })
    }
}

impl FromStr for MutationKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-bit" | "1-bit" | "onebit" => Ok(MutationKind::OneBit),
            "standard-bit" | "standard" | "sbm" => Ok(MutationKind::StandardBit),
            other => Err(LabError::config(format!("unknown mutation operator `{other}`"))),
        }
    }
}

pub fn one_bit_mutation(x: &Individual, rng: &mut RandomSource) -> Individual {
    let pos = rng.index(x.len());
    x.with_flipped(&[pos])
}

/// Samples the number of flips from `Bin(n, 1/n)`, then that many distinct
/// positions uniformly. Identical in law to independent per-bit coin flips.
pub fn standard_bit_mutation(x: &Individual, rng: &mut RandomSource) -> Individual {
    let n = x.len();
    let flips = flip_count(n, rng);
    if flips == 0 {
        return x.clone();
    }
    let positions = rand::seq::index::sample(rng, n, flips).into_vec();
    x.with_flipped(&positions)
}

fn flip_count(n: usize, rng: &mut RandomSource) -> usize {
    binomial(n, 1.0 / n as f64, rng)
}

fn binomial(trials: usize, p: f64, rng: &mut RandomSource) -> usize {
    if trials == 0 {
        return 0;
    }
    Binomial::new(trials as u64, p)
        .expect("probability lies in [0, 1]")
        .sample(rng) as usize
}

/// Ones-count of the offspring of a parent with `k` ones out of `n`.
///
/// For one-bit mutation this consumes exactly the draw the full-genotype path
/// consumes, so on a prefix genotype `1^k 0^(n-k)` both paths agree draw for draw.
pub fn ones_count_transition(
    k: usize,
    n: usize,
    kind: MutationKind,
    rng: &mut RandomSource,
) -> Result<usize> {
    if n == 0 || k > n {
        return Err(LabError::precondition(format!(
            "ones count {k} outside [0, {n}]"
        )));
    }
    Ok(match kind {
        MutationKind::OneBit => {
            if rng.index(n) < k {
                k - 1
            } else {
                k + 1
            }
        }
        MutationKind::StandardBit => {
            let p = 1.0 / n as f64;
            let lost = binomial(k, p, rng);
            let gained = binomial(n - k, p, rng);
            k - lost + gained
        }
    })
}
