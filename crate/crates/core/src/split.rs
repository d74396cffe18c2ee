//! Seeded train/calibration partitions.
//!
//! All randomness in the crate flows from [`stream_rng`]: a ChaCha8 generator
//! keyed by `seed` (expanded with `SeedableRng::seed_from_u64`) and positioned
//! on ChaCha stream `stream`. Split plan `b` of [`make_split_plans`] uses
//! stream `b` and draws a permutation of `0..n` with the descending
//! Fisher-Yates shuffle (`j = uniform(0..=i)` for `i = n-1, …, 1`); the first
//! `m` entries of the permutation form the calibration set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A partition of `0..n` into a training part `L` and a calibration part `I`.
/// Both index lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    train: Vec<usize>,
    calib: Vec<usize>,
}

impl SplitPlan {
    /// Builds a plan from explicit index lists and checks that they
    /// partition `0..n` with both parts non-empty.
    pub fn new(mut train: Vec<usize>, mut calib: Vec<usize>, n: usize) -> Result<Self> {
        train.sort_unstable();
        calib.sort_unstable();
        if train.is_empty() || calib.is_empty() {
            return Err(Error::Size(format!(
                "split needs non-empty parts, got |L|={} |I|={}",
                train.len(),
                calib.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&calib) {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Size(format!(
                    "index {i} is out of range or repeated in a split of 0..{n}"
                )));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Size(format!("split does not cover 0..{n}")));
        }
        Ok(SplitPlan { train, calib })
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn calib(&self) -> &[usize] {
        &self.calib
    }

    /// Size `n` of the partitioned index range.
    pub fn n(&self) -> usize {
        self.train.len() + self.calib.len()
    }

    pub fn calib_size(&self) -> usize {
        self.calib.len()
    }
}

/// The crate's reproducible generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform random permutation of `0..n` by descending Fisher-Yates.
pub fn permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

pub(crate) fn check_split_sizes(n: usize, m: usize) -> Result<()> {
    if m == 0 || m >= n {
        return Err(Error::Size(format!(
            "calibration size m must satisfy 1 <= m <= n-1, got m={m} with n={n}"
        )));
    }
    Ok(())
}

/// One split from a stream: the first `m` permuted indices calibrate.
pub fn random_split<R: Rng>(n: usize, m: usize, rng: &mut R) -> Result<SplitPlan> {
    check_split_sizes(n, m)?;
    let mut perm = permutation(n, rng);
    let mut train = perm.split_off(m);
    let mut calib = perm;
    train.sort_unstable();
    calib.sort_unstable();
    Ok(SplitPlan { train, calib })
}

/// `count` independent uniform partitions of `0..n` with `|I| = m`.
pub fn make_split_plans(n: usize, m: usize, count: usize, seed: u64) -> Result<Vec<SplitPlan>> {
    make_split_plans_with_sizes(n, &vec![m; count], seed)
}

/// Like [`make_split_plans`] but with a calibration size per split.
pub fn make_split_plans_with_sizes(n: usize, sizes: &[usize], seed: u64) -> Result<Vec<SplitPlan>> {
    if sizes.is_empty() {
        return Err(Error::Size("number of splits B must be at least 1".into()));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(b, &m)| random_split(n, m, &mut stream_rng(seed, b as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_partition() {
        let plans = make_split_plans(4, 2, 1, 7).unwrap();
        assert_eq!(plans.len(), 1);
        let p = &plans[0];
        assert_eq!(p.train().len(), 2);
        assert_eq!(p.calib().len(), 2);
        let mut all: Vec<usize> = p.train().iter().chain(p.calib()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn experiment_sized_plans() {
        let plans = make_split_plans(200, 99, 51, 2024).unwrap();
        assert_eq!(plans.len(), 51);
        assert!(plans.iter().all(|p| p.calib_size() == 99 && p.train().len() == 101));
        // independent streams give distinct partitions
        assert_ne!(plans[0], plans[1]);
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(
            make_split_plans(30, 10, 5, 11).unwrap(),
            make_split_plans(30, 10, 5, 11).unwrap()
        );
        assert_ne!(
            make_split_plans(30, 10, 5, 11).unwrap(),
            make_split_plans(30, 10, 5, 12).unwrap()
        );
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(make_split_plans(5, 0, 1, 0), Err(Error::Size(_))));
        assert!(matches!(make_split_plans(5, 5, 1, 0), Err(Error::Size(_))));
        assert!(matches!(make_split_plans(5, 2, 0, 0), Err(Error::Size(_))));
        assert!(SplitPlan::new(vec![0, 1], vec![1, 2], 3).is_err());
        assert!(SplitPlan::new(vec![0], vec![2], 3).is_err());
    }

    #[test]
    fn permutation_is_roughly_uniform() {
        // position of element 0 after shuffling 4 items, 40k draws
        let mut rng = stream_rng(3, 0);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            let p = permutation(4, &mut rng);
            counts[p.iter().position(|&v| v == 0).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
    }

    proptest! {
        #[test]
        fn plans_partition_range(n in 2usize..60, frac in 0.0f64..1.0, b in 1usize..6, seed: u64) {
            let m = 1 + ((n - 2) as f64 * frac) as usize;
            for p in make_split_plans(n, m, b, seed).unwrap() {
                let mut all: Vec<usize> = p.train().iter().chain(p.calib()).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                prop_assert_eq!(p.calib_size(), m);
            }
        }
    }
}
