//! Synthetic datasets with a fixed seed.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, Label};
use crate::split::rng;
use crate::Matrix;

/// Two isotropic unit-variance Gaussian blobs in the plane centred at
/// `(2, 2)` (label `+1`) and `(-2, -2)` (label `-1`). Labels alternate,
/// starting with `+1`.
pub fn gaussian_blobs(n: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let labels: Vec<Label> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    let mut features = Matrix::zeros(n, 2);
    for i in 0..n {
        let centre = 2.0 * f64::from(labels[i]);
        for j in 0..2 {
            let noise: f64 = StandardNormal.sample(&mut r);
            features[(i, j)] = centre + noise;
        }
    }
    Dataset {
        features,
        labels,
        name: "blobs".into(),
    }
}

/// Isotropic standard-normal sample with random `±1` labels.
pub fn isotropic_gaussian(n: usize, d: usize, seed: u64) -> Dataset {
    let mut r = rng(seed);
    let mut features = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            features[(i, j)] = StandardNormal.sample(&mut r);
        }
    }
    let labels = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    Dataset {
        features,
        labels,
        name: "isotropic".into(),
    }
}
