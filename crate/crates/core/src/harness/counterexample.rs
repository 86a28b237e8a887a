//! The start state on which the steady-state NSGA-II gets stuck.
//!
//! `n' = n/c` gaps, all of length `c` except gap `n'/8` (length `c+1`) and
//! gap `n'/4` (length `c-1`), counted from 1. Merging the two odd gaps into
//! two gaps of length `c` needs them to meet first, and both drift apart.

use crate::error::{LabError, Result};
use crate::model::{Genotype, Population};

fn check(n: usize, c: usize) -> Result<()> {
    if c < 2 {
        return Err(LabError::precondition(format!("gap length c = {c} must be at least 2")));
    }
    if n == 0 || !n.is_multiple_of(16 * c) {
        return Err(LabError::precondition(format!("16c = {} must divide n = {n}", 16 * c)));
    }
    Ok(())
}

/// Population size of the counterexample, `n/c + 1`.
pub fn counterexample_size(n: usize, c: usize) -> Result<usize> {
    check(n, c)?;
    Ok(n / c + 1)
}

/// Ascending first-objective values of the counterexample.
pub fn counterexample_values(n: usize, c: usize) -> Result<Vec<u64>> {
    check(n, c)?;
    let gaps = n / c;
    let mut values = Vec::with_capacity(gaps + 1);
    let mut v = 0u64;
    values.push(v);
    for i in 1..=gaps {
        v += if i == gaps / 8 {
            c + 1
        } else if i == gaps / 4 {
            c - 1
        } else {
            c
        } as u64;
        values.push(v);
    }
    debug_assert_eq!(v, n as u64);
    Ok(values)
}

/// Prefix genotypes `1^k 0^(n-k)` for the counterexample values, ascending.
pub fn build_counterexample<G: Genotype>(n: usize, c: usize) -> Result<Population<G>> {
    Population::from_f1_values(n, &counterexample_values(n, c)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Individual;
    use crate::spread::{alpha_beta, interval_profile, is_optimal_spread};
    use proptest::prelude::*;

    #[test]
    fn n32_c2_example() {
        let v = counterexample_values(32, 2).unwrap();
        assert_eq!(v.len(), 17);
        assert_eq!(&v[..7], &[0, 2, 5, 7, 8, 10, 12]);
        assert_eq!(*v.last().unwrap(), 32);
        let p = interval_profile(&v, 32);
        let mut gaps = p.gaps.clone();
        gaps.sort_unstable();
        assert_eq!(gaps[0], 1);
        assert_eq!(gaps[15], 3);
        assert!(gaps[1..15].iter().all(|&g| g == 2));
        assert_eq!((p.min_gap, p.max_gap), (1, 3));
        assert_eq!(alpha_beta(32, 17).unwrap().alpha, 2);
        assert!(!is_optimal_spread(&v, 32));
    }

    #[test]
    fn genotypes_are_prefixes() {
        let pop = build_counterexample::<Individual>(32, 2).unwrap();
        assert_eq!(pop.len(), 17);
        for x in pop.iter() {
            assert_eq!(*x, Individual::prefix(32, x.ones()));
        }
    }

    #[test]
    fn divisibility_is_enforced() {
        assert!(counterexample_values(48, 2).is_err());
        assert!(counterexample_values(64, 1).is_err());
        assert!(counterexample_values(0, 2).is_err());
        assert!(counterexample_values(96, 3).is_ok());
    }

    proptest! {
        #[test]
        fn gaps_sum_to_n_with_one_odd_pair(c in 2usize..6, k in 1usize..5) {
            let n = 16 * c * k;
            let v = counterexample_values(n, c).unwrap();
            let p = interval_profile(&v, n as u64);
            prop_assert!(p.is_defined());
            prop_assert_eq!(p.gaps.iter().sum::<u64>(), n as u64);
            prop_assert_eq!(p.gaps.iter().filter(|&&g| g == c as u64 + 1).count(), 1);
            prop_assert_eq!(p.gaps.iter().filter(|&&g| g == c as u64 - 1).count(), 1);
            prop_assert_eq!(p.gaps[n / c / 8 - 1], c as u64 + 1);
            prop_assert_eq!(p.gaps[n / c / 4 - 1], c as u64 - 1);
        }
    }
}
