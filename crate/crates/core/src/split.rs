//! Seeded train/test splits and k-fold partitions.
//!
//! All randomness comes from [`rng`]: a Xoshiro256++ generator whose 256-bit
//! state is filled from the 64-bit seed by SplitMix64
//! (`rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64`). Shuffles are the
//! Fisher-Yates implementation of `rand` 0.8 (`SliceRandom::shuffle`). Both
//! crates are pinned, so a seed maps to the same permutation on every
//! platform.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

/// `round(0.7 n)` with halves rounded up, in integer arithmetic.
pub fn train_size(n: usize) -> usize {
    (7 * n + 5) / 10
}

/// Uniformly random 70:30 split of `0..n`.
pub fn split_70_30(n: usize, seed: u64) -> Result<SplitPlan> {
    if n < 4 {
        return Err(Error::Config(format!(
            "a 70:30 split needs at least 4 samples, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng(seed));
    let test = idx.split_off(train_size(n));
    Ok(SplitPlan {
        train: idx,
        test,
        seed,
    })
}

/// 70:30 split drawn separately within each class so both sides keep the
/// class proportions (up to rounding).
pub fn split_70_30_stratified(labels: &[Label], seed: u64) -> Result<SplitPlan> {
    let n = labels.len();
    if n < 4 {
        return Err(Error::Config(format!(
            "a 70:30 split needs at least 4 samples, got {n}"
        )));
    }
    let mut r = rng(seed);
    let mut train = Vec::with_capacity(train_size(n));
    let mut test = Vec::new();
    for class in [1, -1] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut r);
        let rest = members.split_off(train_size(members.len()));
        train.extend(members);
        test.extend(rest);
    }
    train.shuffle(&mut r);
    test.shuffle(&mut r);
    Ok(SplitPlan { train, test, seed })
}

/// Shuffles `indices` and deals them into `k` contiguous folds whose sizes
/// differ by at most one (the larger folds first).
pub fn kfold(indices: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("k-fold needs k >= 2, got {k}")));
    }
    if indices.len() < k {
        return Err(Error::Config(format!(
            "cannot make {k} folds from {} samples",
            indices.len()
        )));
    }
    let mut shuffled = indices.to_vec();
    shuffled.shuffle(&mut rng(seed));
    let base = shuffled.len() / k;
    let extra = shuffled.len() % k;
    let mut folds = Vec::with_capacity(k);
    let mut rest = shuffled.as_slice();
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let (head, tail) = rest.split_at(size);
        folds.push(head.to_vec());
        rest = tail;
    }
    Ok(folds)
}
