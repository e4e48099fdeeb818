//! Kernel evaluation and (multiview) Gram matrices.
//!
//! The RBF kernel is `exp(-||x - y||^2 / (2 sigma^2))`. There is no
//! gamma-style alias; sigma is the only bandwidth parameter.

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

/// Kernel family plus its bandwidth. `sigma` is ignored by the linear kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Self {
        KernelSpec {
            kind: KernelKind::Rbf,
            sigma,
        }
    }

    pub fn linear() -> Self {
        KernelSpec {
            kind: KernelKind::Linear,
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "rbf sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    #[inline]
    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                libm::exp(-sq / (2.0 * self.sigma * self.sigma))
            }
            KernelKind::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        }
    }
}

pub fn kernel_eval(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::dim("kernel_eval", x.len(), y.len()));
    }
    Ok(spec.eval_unchecked(x, y))
}

fn rows(m: &Matrix) -> alloc::vec::Vec<alloc::vec::Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Dense kernel matrix between the rows of `x` and the rows of `y`.
///
/// Every entry is computed independently, so `gram(x, y)` equals
/// `gram(y, x)` transposed bit for bit.
pub fn gram(x: &Matrix, y: &Matrix, spec: &KernelSpec) -> Result<Matrix> {
    spec.validate()?;
    if x.ncols() != y.ncols() {
        return Err(Error::dim("gram columns", x.ncols(), y.ncols()));
    }
    let xr = rows(x);
    let yr = rows(y);
    Ok(Matrix::from_fn(x.nrows(), y.nrows(), |i, j| {
        spec.eval_unchecked(&xr[i], &yr[j])
    }))
}

/// Checks that every view in `views` has the same number of rows and
/// returns that count.
pub(crate) fn common_rows(views: &[Matrix], what: &str) -> Result<usize> {
    let first = views
        .first()
        .ok_or_else(|| Error::ViewMismatch(format!("{what}: at least one view is required")))?;
    let n = first.nrows();
    if let Some((v, m)) = views.iter().enumerate().find(|(_, m)| m.nrows() != n) {
        return Err(Error::ViewMismatch(format!(
            "{what}: view {v} has {} rows, view 0 has {n}",
            m.nrows()
        )));
    }
    Ok(n)
}

/// Sum over views of the per-view Gram matrices, all with the same kernel.
pub fn multiview_gram(xs: &[Matrix], ys: &[Matrix], spec: &KernelSpec) -> Result<Matrix> {
    if xs.len() != ys.len() {
        return Err(Error::ViewMismatch(format!(
            "left side has {} views, right side has {}",
            xs.len(),
            ys.len()
        )));
    }
    common_rows(xs, "left views")?;
    common_rows(ys, "right views")?;
    for (v, (x, y)) in xs.iter().zip(ys).enumerate() {
        if x.ncols() != y.ncols() {
            return Err(Error::ViewMismatch(format!(
                "view {v}: {} features on the left, {} on the right",
                x.ncols(),
                y.ncols()
            )));
        }
    }
    let mut total = gram(&xs[0], &ys[0], spec)?;
    for (x, y) in xs.iter().zip(ys).skip(1) {
        total += gram(x, y, spec)?;
    }
    Ok(total)
}
