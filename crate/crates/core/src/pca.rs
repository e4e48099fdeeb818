//! Principal component analysis used to synthesize a second view.
//!
//! The retained rank is the smallest `r` whose cumulative explained-variance
//! ratio reaches the threshold. Components come from the SVD of the centered
//! data; each component's sign is fixed so that its largest-magnitude entry
//! is positive.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{Dataset, MultiviewDataset};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaTransform {
    pub mean: Vector,
    /// `r × d`, orthonormal rows.
    pub components: Matrix,
    /// Explained-variance ratio of each retained component, nonincreasing.
    pub explained_ratio: Vec<f64>,
}

impl PcaTransform {
    pub fn rank(&self) -> usize {
        self.components.nrows()
    }
}

pub fn pca_fit(x: &Matrix, variance_threshold: f64) -> Result<PcaTransform> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::ingest(format!("PCA needs at least 2 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::ingest("PCA needs at least one column"));
    }
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "variance threshold must lie in (0, 1], got {variance_threshold}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::ingest("non-finite value in PCA input"));
    }

    let mean = Vector::from_iterator(d, x.column_iter().map(|c| c.sum() / n as f64));
    let centered = Matrix::from_fn(n, d, |i, j| x[(i, j)] - mean[j]);
    let svd = centered.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::SingularSystem("SVD did not return right singular vectors".into()))?;

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let s_max = order
        .first()
        .map(|&i| svd.singular_values[i])
        .unwrap_or(0.0);
    let tol = (n.max(d) as f64) * f64::EPSILON * s_max;
    let variances: Vec<f64> = order
        .iter()
        .map(|&i| {
            let s = svd.singular_values[i];
            if s <= tol {
                0.0
            } else {
                s * s
            }
        })
        .collect();
    let total: f64 = variances.iter().sum();

    let (rank, ratios) = if total == 0.0 {
        (1, vec![0.0])
    } else {
        let mut cumulative = 0.0;
        let mut rank = variances.len();
        for (k, v) in variances.iter().enumerate() {
            cumulative += v;
            if cumulative / total >= variance_threshold {
                rank = k + 1;
                break;
            }
        }
        (rank, variances[..rank].iter().map(|v| v / total).collect())
    };

    let mut components = Matrix::zeros(rank, d);
    for (r, &idx) in order.iter().take(rank).enumerate() {
        let mut row = v_t.row(idx).into_owned();
        let pivot = row.iter().copied().fold(
            0.0f64,
            |best, v| if v.abs() > best.abs() { v } else { best },
        );
        if pivot < 0.0 {
            row.neg_mut();
        }
        components.set_row(r, &row);
    }
    Ok(PcaTransform {
        mean,
        components,
        explained_ratio: ratios,
    })
}

/// Principal scores `(x - mean) componentsᵀ`.
pub fn pca_apply(t: &PcaTransform, x: &Matrix) -> Result<Matrix> {
    if x.ncols() != t.mean.len() {
        return Err(Error::dim("pca_apply columns", t.mean.len(), x.ncols()));
    }
    let centered = Matrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - t.mean[j]);
    Ok(centered * t.components.transpose())
}

/// Turns single-view train/test data into two-view data: view A is the
/// original features and view B the principal scores of a transform fitted
/// on the training features alone.
pub fn make_second_view(
    train: &Dataset,
    test: &Dataset,
    threshold: f64,
) -> Result<(MultiviewDataset, MultiviewDataset, PcaTransform)> {
    if train.features.ncols() != test.features.ncols() {
        return Err(Error::dim(
            "second view columns",
            train.features.ncols(),
            test.features.ncols(),
        ));
    }
    let pca = pca_fit(&train.features, threshold)?;
    let train_b = pca_apply(&pca, &train.features)?;
    let test_b = pca_apply(&pca, &test.features)?;
    let train_mv = MultiviewDataset::new(
        vec![train.features.clone(), train_b],
        train.labels.clone(),
        train.name.clone(),
    )?;
    let test_mv = MultiviewDataset {
        views: vec![test.features.clone(), test_b],
        labels: test.labels.clone(),
        name: test.name.clone(),
    };
    Ok((train_mv, test_mv, pca))
}
