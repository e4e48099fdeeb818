//! Single-system multiview RKM classifier, used as the in-repo baseline.
//!
//! Unknowns are `z = y ⊙ h` and one bias `b`:
//!
//! ```text
//! [ (1/eta) sum_v K_v + lambda I   V 1 ] [z]   [V y]
//! [ V 1ᵀ                           0   ] [b] = [ 0 ]
//! ```
//!
//! and a sample is scored by `(1/eta) sum_v K_v(x, X_v) z + b`.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{Label, MultiviewDataset};
use crate::error::{Error, Result};
use crate::kernel::{common_rows, multiview_gram, KernelSpec};
use crate::solver::{solve_bordered, BorderedSystem};
use crate::tmvrkm::sign_label;
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MvrkmParams {
    pub eta: f64,
    pub lambda: f64,
    pub kernel: KernelSpec,
}

impl MvrkmParams {
    pub fn new(eta: f64, lambda: f64, kernel: KernelSpec) -> Self {
        MvrkmParams {
            eta,
            lambda,
            kernel,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("lambda", self.lambda)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.kernel.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MvrkmModel {
    pub z: Vector,
    pub b: f64,
    pub train_views: Vec<Matrix>,
    pub labels: Vec<Label>,
    pub params: MvrkmParams,
}

pub(crate) fn check_both_classes(labels: &[Label], name: &str) -> Result<()> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::DegenerateClass(format!(
            "'{name}' has {pos} positive and {} negative samples",
            labels.len() - pos
        )));
    }
    Ok(())
}

pub(crate) fn mvrkm_system(
    gram: &Matrix,
    y: &Vector,
    views: usize,
    p: &MvrkmParams,
) -> BorderedSystem {
    let n = gram.nrows();
    let v = views as f64;
    let mut core = gram.map(|k| k / p.eta);
    for i in 0..n {
        core[(i, i)] += p.lambda;
    }
    BorderedSystem::symmetric(core, Vector::from_element(n, v), y * v, 0.0)
}

pub(crate) fn solve_from_gram(
    gram: &Matrix,
    y: &Vector,
    views: usize,
    p: &MvrkmParams,
) -> Result<(Vector, f64)> {
    let sol = solve_bordered(&mvrkm_system(gram, y, views, p))?;
    Ok((sol.h, sol.b))
}

/// Scores given the view-summed kernel of the queries against the training rows.
pub(crate) fn scores_from_gram(cross: &Matrix, z: &Vector, b: f64, p: &MvrkmParams) -> Vec<f64> {
    (cross * z).iter().map(|s| s / p.eta + b).collect()
}

pub fn fit_mvrkm(data: &MultiviewDataset, params: &MvrkmParams) -> Result<MvrkmModel> {
    params.validate()?;
    if data.len() < 2 {
        return Err(Error::DegenerateClass(format!(
            "need at least 2 samples, got {}",
            data.len()
        )));
    }
    check_both_classes(&data.labels, &data.name)?;
    let gram = multiview_gram(&data.views, &data.views, &params.kernel)?;
    let (z, b) = solve_from_gram(&gram, &data.labels_f64(), data.n_views(), params)?;
    Ok(MvrkmModel {
        z,
        b,
        train_views: data.views.clone(),
        labels: data.labels.clone(),
        params: *params,
    })
}

impl MvrkmModel {
    pub fn from_parts(
        z: Vector,
        b: f64,
        train_views: Vec<Matrix>,
        labels: Vec<Label>,
        params: MvrkmParams,
    ) -> Result<Self> {
        params.validate()?;
        let n = common_rows(&train_views, "training views")?;
        if z.len() != n {
            return Err(Error::dim("z", n, z.len()));
        }
        if labels.len() != n {
            return Err(Error::dim("labels", n, labels.len()));
        }
        Ok(MvrkmModel {
            z,
            b,
            train_views,
            labels,
            params,
        })
    }

    /// The system this model was solved from.
    pub fn system(&self) -> Result<BorderedSystem> {
        let gram = multiview_gram(&self.train_views, &self.train_views, &self.params.kernel)?;
        let y = Vector::from_iterator(self.labels.len(), self.labels.iter().map(|&l| f64::from(l)));
        Ok(mvrkm_system(
            &gram,
            &y,
            self.train_views.len(),
            &self.params,
        ))
    }

    pub fn decision_scores(&self, x_views: &[Matrix]) -> Result<Vec<f64>> {
        if x_views.len() != self.train_views.len() {
            return Err(Error::ViewMismatch(format!(
                "model has {} views, input has {}",
                self.train_views.len(),
                x_views.len()
            )));
        }
        let cross = multiview_gram(x_views, &self.train_views, &self.params.kernel)?;
        Ok(scores_from_gram(&cross, &self.z, self.b, &self.params))
    }

    pub fn predict(&self, x_views: &[Matrix]) -> Result<Vec<Label>> {
        Ok(self
            .decision_scores(x_views)?
            .into_iter()
            .map(sign_label)
            .collect())
    }
}
