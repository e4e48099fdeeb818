//! Datasets and per-column standardization.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::common_rows;
use crate::{Matrix, Vector};

/// Binary class label, stored as `+1` / `-1`.
pub type Label = i8;

fn check_labels(labels: &[Label]) -> Result<()> {
    if let Some(i) = labels.iter().position(|&l| l != 1 && l != -1) {
        return Err(Error::Ingest {
            row: Some(i + 1),
            message: format!("label {} is not ±1", labels[i]),
        });
    }
    Ok(())
}

fn check_finite(m: &Matrix, what: &str) -> Result<()> {
    for i in 0..m.nrows() {
        if m.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::Ingest {
                row: Some(i + 1),
                message: format!("non-finite value in {what}"),
            });
        }
    }
    Ok(())
}

/// Single-view labelled data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub labels: Vec<Label>,
    pub name: String,
}

impl Dataset {
    pub fn new(features: Matrix, labels: Vec<Label>, name: impl Into<String>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::dim("dataset labels", features.nrows(), labels.len()));
        }
        if features.nrows() < 2 {
            return Err(Error::ingest(format!(
                "dataset needs at least 2 rows, got {}",
                features.nrows()
            )));
        }
        check_finite(&features, "features")?;
        check_labels(&labels)?;
        Ok(Dataset {
            features,
            labels,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
        }
    }

    /// Splits the feature columns into consecutive blocks, one per view.
    pub fn into_views(self, widths: &[usize]) -> Result<MultiviewDataset> {
        let total: usize = widths.iter().sum();
        if total != self.features.ncols() || widths.contains(&0) {
            return Err(Error::ViewMismatch(format!(
                "view widths {widths:?} do not partition {} feature columns",
                self.features.ncols()
            )));
        }
        let mut start = 0;
        let views = widths
            .iter()
            .map(|&w| {
                let v = self.features.columns(start, w).into_owned();
                start += w;
                v
            })
            .collect();
        MultiviewDataset::new(views, self.labels, self.name)
    }
}

/// Row-aligned views of the same samples with a shared label vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiviewDataset {
    pub views: Vec<Matrix>,
    pub labels: Vec<Label>,
    pub name: String,
}

impl MultiviewDataset {
    pub fn new(views: Vec<Matrix>, labels: Vec<Label>, name: impl Into<String>) -> Result<Self> {
        let n = common_rows(&views, "multiview dataset")?;
        if n != labels.len() {
            return Err(Error::dim("multiview labels", n, labels.len()));
        }
        for v in &views {
            check_finite(v, "view")?;
        }
        check_labels(&labels)?;
        Ok(MultiviewDataset {
            views,
            labels,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn view_dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.ncols()).collect()
    }

    pub fn select(&self, indices: &[usize]) -> MultiviewDataset {
        MultiviewDataset {
            views: self.views.iter().map(|v| v.select_rows(indices)).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
        }
    }

    /// Indices of the positive and negative samples, in row order.
    pub fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.len()).partition(|&i| self.labels[i] == 1)
    }

    pub fn labels_f64(&self) -> Vector {
        Vector::from_iterator(self.len(), self.labels.iter().map(|&l| f64::from(l)))
    }
}

/// Columns whose training standard deviation falls below this are only centered.
pub const MIN_STD: f64 = 1e-12;

/// Per-column z-score statistics estimated on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vector,
    /// Divisor per column: the population standard deviation, or 1 for
    /// (near-)constant columns.
    pub scale: Vector,
}

impl Standardizer {
    pub fn fit(train: &Matrix) -> Result<Self> {
        let n = train.nrows();
        if n == 0 {
            return Err(Error::ingest("cannot standardize an empty training matrix"));
        }
        let d = train.ncols();
        let mut mean = Vector::zeros(d);
        let mut scale = Vector::zeros(d);
        for j in 0..d {
            let col = train.column(j);
            let mu = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
            let sd = libm::sqrt(var);
            mean[j] = mu;
            scale[j] = if sd < MIN_STD { 1.0 } else { sd };
        }
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        if x.ncols() != self.mean.len() {
            return Err(Error::dim(
                "standardize columns",
                self.mean.len(),
                x.ncols(),
            ));
        }
        Ok(Matrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - self.mean[j]) / self.scale[j]
        }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    pub train: Matrix,
    pub test: Matrix,
    pub stats: Standardizer,
}

/// Z-scores both matrices with statistics taken from `train` only.
pub fn standardize(train: &Matrix, test: &Matrix) -> Result<Standardized> {
    let stats = Standardizer::fit(train)?;
    Ok(Standardized {
        train: stats.apply(train)?,
        test: stats.apply(test)?,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_column_becomes_zero() {
        let train = Matrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let s = standardize(&train, &train).unwrap();
        assert!(s.train.column(1).iter().all(|&v| v == 0.0));
        assert_eq!(s.stats.scale[1], 1.0);
    }

    #[test]
    fn train_columns_are_centered() {
        let train = Matrix::from_fn(17, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 * 1.3 - 4.0);
        let s = standardize(&train, &Matrix::zeros(0, 3)).unwrap();
        for j in 0..3 {
            assert!((s.train.column(j).sum() / 17.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn test_matrix_uses_train_statistics() {
        let train = Matrix::from_fn(10, 2, |i, j| (i as f64) * (j as f64 + 1.0));
        let test = Matrix::from_fn(4, 2, |i, j| 100.0 + i as f64 - j as f64);
        let s = standardize(&train, &test).unwrap();
        let recomputed = Matrix::from_fn(4, 2, |i, j| {
            (test[(i, j)] - s.stats.mean[j]) / s.stats.scale[j]
        });
        assert_eq!(s.test, recomputed);
    }

    #[test]
    fn dataset_validation() {
        let x = Matrix::zeros(3, 2);
        assert!(Dataset::new(x.clone(), vec![1, -1, 1], "ok").is_ok());
        assert!(matches!(
            Dataset::new(x.clone(), vec![1, 0, 1], "bad"),
            Err(Error::Ingest { row: Some(2), .. })
        ));
        assert!(Dataset::new(x.clone(), vec![1, -1], "short").is_err());
        let mut nan = x.clone();
        nan[(2, 1)] = f64::NAN;
        assert!(matches!(
            Dataset::new(nan, vec![1, -1, 1], "nan"),
            Err(Error::Ingest { row: Some(3), .. })
        ));
    }

    #[test]
    fn into_views_partitions_columns() {
        let x = Matrix::from_fn(4, 5, |i, j| (i * 5 + j) as f64);
        let d = Dataset::new(x, vec![1, -1, 1, -1], "d").unwrap();
        let mv = d.clone().into_views(&[2, 3]).unwrap();
        assert_eq!(mv.view_dims(), vec![2, 3]);
        assert_eq!(mv.views[1][(1, 0)], 7.0);
        assert!(d.into_views(&[2, 2]).is_err());
    }
}
