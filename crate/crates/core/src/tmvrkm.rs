//! Twin multiview restricted kernel machine.
//!
//! One hyperplane is fitted per class. Each one comes from a bordered system
//! whose core is the view-summed Gram matrix of its own class, scaled by
//! `1/eta` and regularized by `lambda I`. The border carries the single
//! shared bias. A sample is labelled by the sign of `f1(x) + f2(x)`, with
//!
//! ```text
//! f1(x) = (1/eta1) [ sum_v K(x_v, A_v) h1 - sum_v K(x_v, B_v) 1 ]
//! f2(x) = (1/eta2) [ sum_v K(x_v, B_v) h2 + sum_v K(x_v, A_v) 1 ]
//! ```
//!
//! where `A_v` / `B_v` hold the positive / negative training samples of view `v`.
//!
//! Two assemblies are available (see [`Variant`]); the decision functions
//! are the same for both.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{Label, MultiviewDataset};
use crate::error::{Error, Result};
use crate::kernel::{common_rows, multiview_gram, KernelKind, KernelSpec};
use crate::solver::{solve_bordered, BorderedSystem};
use crate::{Matrix, Vector};

/// Which right-hand side / border signs the two systems use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// The displayed block systems, with the bottom rows read as all-ones
    /// vectors of the matching length.
    AsPublished,
    /// Signs obtained by setting the Lagrangian gradients to zero after
    /// substituting the explicit weights. Only this variant satisfies the
    /// stationarity conditions checked by [`stationarity_check`].
    #[default]
    DerivationConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmvrkmParams {
    pub eta1: f64,
    pub eta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub kernel: KernelSpec,
    pub variant: Variant,
}

impl TmvrkmParams {
    /// Both hyperplanes share `eta` and `lambda`.
    pub fn tied(eta: f64, lambda: f64, kernel: KernelSpec) -> Self {
        TmvrkmParams {
            eta1: eta,
            eta2: eta,
            lambda1: lambda,
            lambda2: lambda,
            kernel,
            variant: Variant::default(),
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.kernel.validate()
    }
}

/// Per-view training samples of the positive (`A`) and negative (`B`) class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSplit {
    pub positive: Vec<Matrix>,
    pub negative: Vec<Matrix>,
}

impl ClassSplit {
    pub fn new(positive: Vec<Matrix>, negative: Vec<Matrix>) -> Result<Self> {
        if positive.len() != negative.len() {
            return Err(Error::ViewMismatch(format!(
                "{} positive views but {} negative views",
                positive.len(),
                negative.len()
            )));
        }
        let m1 = common_rows(&positive, "positive class")?;
        let m2 = common_rows(&negative, "negative class")?;
        if m1 == 0 || m2 == 0 {
            return Err(Error::DegenerateClass(format!(
                "class sizes m1 = {m1}, m2 = {m2}; both must be >= 1"
            )));
        }
        for (v, (a, b)) in positive.iter().zip(&negative).enumerate() {
            if a.ncols() != b.ncols() {
                return Err(Error::ViewMismatch(format!(
                    "view {v}: positive samples have {} features, negative samples {}",
                    a.ncols(),
                    b.ncols()
                )));
            }
        }
        Ok(ClassSplit { positive, negative })
    }

    pub fn from_dataset(data: &MultiviewDataset) -> Result<Self> {
        let (pos, neg) = data.class_indices();
        if pos.is_empty() || neg.is_empty() {
            return Err(Error::DegenerateClass(format!(
                "dataset '{}' has {} positive and {} negative samples",
                data.name,
                pos.len(),
                neg.len()
            )));
        }
        let select = |idx: &[usize]| data.views.iter().map(|v| v.select_rows(idx)).collect();
        ClassSplit::new(select(&pos), select(&neg))
    }

    pub fn n_views(&self) -> usize {
        self.positive.len()
    }

    pub fn m1(&self) -> usize {
        self.positive[0].nrows()
    }

    pub fn m2(&self) -> usize {
        self.negative[0].nrows()
    }

    pub fn view_dims(&self) -> Vec<usize> {
        self.positive.iter().map(|v| v.ncols()).collect()
    }
}

/// View-summed Gram blocks of a class split.
#[derive(Debug, Clone)]
pub(crate) struct TwinGrams {
    pub aa: Matrix,
    pub ab: Matrix,
    pub bb: Matrix,
}

impl TwinGrams {
    pub(crate) fn compute(split: &ClassSplit, kernel: &KernelSpec) -> Result<Self> {
        Ok(TwinGrams {
            aa: multiview_gram(&split.positive, &split.positive, kernel)?,
            ab: multiview_gram(&split.positive, &split.negative, kernel)?,
            bb: multiview_gram(&split.negative, &split.negative, kernel)?,
        })
    }
}

fn row_sums(m: &Matrix) -> Vector {
    Vector::from_iterator(m.nrows(), m.row_iter().map(|r| r.sum()))
}

/// `core = own/eta + lambda I`, `rhs_top = V 1 + rhs_sign * (cross 1)/eta`,
/// column border `border_sign * V 1`, bottom row `1ᵀ h = bottom`.
fn half_system(
    own: &Matrix,
    cross: &Matrix,
    views: usize,
    eta: f64,
    lambda: f64,
    border_sign: f64,
    rhs_sign: f64,
    bottom: usize,
) -> BorderedSystem {
    let m = own.nrows();
    let v = views as f64;
    let mut core = own.map(|k| k / eta);
    for i in 0..m {
        core[(i, i)] += lambda;
    }
    let coupling = row_sums(cross).map(|s| s / eta);
    BorderedSystem {
        core,
        border: Vector::from_element(m, border_sign * v),
        row_border: Vector::from_element(m, 1.0),
        corner: 0.0,
        rhs_top: coupling.map(|c| v + rhs_sign * c),
        rhs_bottom: bottom as f64,
    }
}

fn positive_from_grams(g: &TwinGrams, views: usize, p: &TmvrkmParams) -> BorderedSystem {
    let rhs_sign = match p.variant {
        Variant::AsPublished => -1.0,
        Variant::DerivationConsistent => 1.0,
    };
    half_system(
        &g.aa,
        &g.ab,
        views,
        p.eta1,
        p.lambda1,
        1.0,
        rhs_sign,
        g.bb.nrows(),
    )
}

fn negative_from_grams(g: &TwinGrams, views: usize, p: &TmvrkmParams) -> BorderedSystem {
    let border_sign = match p.variant {
        Variant::AsPublished => 1.0,
        Variant::DerivationConsistent => -1.0,
    };
    half_system(
        &g.bb,
        &g.ab.transpose(),
        views,
        p.eta2,
        p.lambda2,
        border_sign,
        -1.0,
        g.aa.nrows(),
    )
}

/// System for the positive-class hyperplane `(h1, b1)`.
pub fn assemble_positive_system(
    split: &ClassSplit,
    params: &TmvrkmParams,
) -> Result<BorderedSystem> {
    params.validate()?;
    let g = TwinGrams::compute(split, &params.kernel)?;
    Ok(positive_from_grams(&g, split.n_views(), params))
}

/// System for the negative-class hyperplane `(h2, b2)`.
pub fn assemble_negative_system(
    split: &ClassSplit,
    params: &TmvrkmParams,
) -> Result<BorderedSystem> {
    params.validate()?;
    let g = TwinGrams::compute(split, &params.kernel)?;
    Ok(negative_from_grams(&g, split.n_views(), params))
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TwinSolution {
    pub h1: Vector,
    pub b1: f64,
    pub h2: Vector,
    pub b2: f64,
}

pub(crate) fn solve_twin(g: &TwinGrams, views: usize, p: &TmvrkmParams) -> Result<TwinSolution> {
    let pos = solve_bordered(&positive_from_grams(g, views, p))?;
    let neg = solve_bordered(&negative_from_grams(g, views, p))?;
    Ok(TwinSolution {
        h1: pos.h,
        b1: pos.b,
        h2: neg.h,
        b2: neg.b,
    })
}

/// `(f1, f2)` per row, given the view-summed kernels of the query samples
/// against the positive (`xa`) and negative (`xb`) training samples.
pub(crate) fn twin_scores(
    sol: &TwinSolution,
    xa: &Matrix,
    xb: &Matrix,
    p: &TmvrkmParams,
) -> Vec<(f64, f64)> {
    let a_h = xa * &sol.h1;
    let b_h = xb * &sol.h2;
    let a_sum = row_sums(xa);
    let b_sum = row_sums(xb);
    (0..xa.nrows())
        .map(|i| ((a_h[i] - b_sum[i]) / p.eta1, (b_h[i] + a_sum[i]) / p.eta2))
        .collect()
}

pub(crate) fn sign_label(score: f64) -> Label {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmvrkmModel {
    pub h1: Vector,
    pub b1: f64,
    pub h2: Vector,
    pub b2: f64,
    pub split: ClassSplit,
    pub params: TmvrkmParams,
}

pub fn fit(split: &ClassSplit, params: &TmvrkmParams) -> Result<TmvrkmModel> {
    params.validate()?;
    let g = TwinGrams::compute(split, &params.kernel)?;
    let sol = solve_twin(&g, split.n_views(), params)?;
    Ok(TmvrkmModel {
        h1: sol.h1,
        b1: sol.b1,
        h2: sol.h2,
        b2: sol.b2,
        split: split.clone(),
        params: *params,
    })
}

impl TmvrkmModel {
    /// Rebuilds a fitted model from stored parts, checking their shapes.
    pub fn from_parts(
        h1: Vector,
        b1: f64,
        h2: Vector,
        b2: f64,
        split: ClassSplit,
        params: TmvrkmParams,
    ) -> Result<Self> {
        params.validate()?;
        if h1.len() != split.m1() {
            return Err(Error::dim("h1", split.m1(), h1.len()));
        }
        if h2.len() != split.m2() {
            return Err(Error::dim("h2", split.m2(), h2.len()));
        }
        Ok(TmvrkmModel {
            h1,
            b1,
            h2,
            b2,
            split,
            params,
        })
    }

    fn solution(&self) -> TwinSolution {
        TwinSolution {
            h1: self.h1.clone(),
            b1: self.b1,
            h2: self.h2.clone(),
            b2: self.b2,
        }
    }

    fn check_views(&self, x_views: &[Matrix]) -> Result<()> {
        if x_views.len() != self.split.n_views() {
            return Err(Error::ViewMismatch(format!(
                "model has {} views, input has {}",
                self.split.n_views(),
                x_views.len()
            )));
        }
        for (v, (x, d)) in x_views.iter().zip(self.split.view_dims()).enumerate() {
            if x.ncols() != d {
                return Err(Error::ViewMismatch(format!(
                    "view {v}: model expects {d} features, input has {}",
                    x.ncols()
                )));
            }
        }
        common_rows(x_views, "query views").map(|_| ())
    }

    /// `(f1, f2)` for every row of the query views.
    pub fn decision_scores_batch(&self, x_views: &[Matrix]) -> Result<Vec<(f64, f64)>> {
        self.check_views(x_views)?;
        let xa = multiview_gram(x_views, &self.split.positive, &self.params.kernel)?;
        let xb = multiview_gram(x_views, &self.split.negative, &self.params.kernel)?;
        Ok(twin_scores(&self.solution(), &xa, &xb, &self.params))
    }

    /// `(f1, f2)` for a single sample given as one feature vector per view.
    pub fn decision_scores(&self, x_views: &[&[f64]]) -> Result<(f64, f64)> {
        let rows: Vec<Matrix> = x_views
            .iter()
            .map(|x| Matrix::from_row_slice(1, x.len(), x))
            .collect();
        Ok(self.decision_scores_batch(&rows)?[0])
    }

    /// `+1` where `f1 + f2 >= 0`, else `-1`.
    pub fn predict(&self, x_views: &[Matrix]) -> Result<Vec<Label>> {
        Ok(self
            .decision_scores_batch(x_views)?
            .into_iter()
            .map(|(f1, f2)| sign_label(f1 + f2))
            .collect())
    }

    /// `1ᵀh1 - m2` and `1ᵀh2 - m1`, the bottom rows of the two systems.
    pub fn bottom_row_residuals(&self) -> (f64, f64) {
        (
            self.h1.sum() - self.split.m2() as f64,
            self.h2.sum() - self.split.m1() as f64,
        )
    }
}

/// Max-norm residuals of the four stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityResiduals {
    pub r_h1: f64,
    pub r_b1: f64,
    pub r_h2: f64,
    pub r_b2: f64,
}

impl StationarityResiduals {
    pub fn max(&self) -> f64 {
        self.r_h1.max(self.r_b1).max(self.r_h2).max(self.r_b2)
    }
}

/// Rebuilds the explicit per-view weights of a linear-kernel model and
/// evaluates the gradient conditions with respect to `h1`, `b1`, `h2`, `b2`.
///
/// ```text
/// w_v = (A_vᵀ h1 - B_vᵀ 1) / eta1        u_v = -(A_vᵀ 1 + B_vᵀ h2) / eta2
/// r_h1 = || sum_v (1 - A_v w_v - b1) - lambda1 h1 ||_inf
/// r_h2 = || sum_v (1 + B_v u_v + b2) - lambda2 h2 ||_inf
/// r_b1 = |1ᵀ h1 - m2|                     r_b2 = |1ᵀ h2 - m1|
/// ```
pub fn stationarity_check(model: &TmvrkmModel) -> Result<StationarityResiduals> {
    if model.params.kernel.kind != KernelKind::Linear {
        return Err(Error::UnsupportedCheck(
            "explicit weights exist only for the linear kernel".into(),
        ));
    }
    if model.params.variant != Variant::DerivationConsistent {
        return Err(Error::UnsupportedCheck(
            "stationarity holds only for the derivation-consistent variant".into(),
        ));
    }
    let p = &model.params;
    let (m1, m2) = (model.split.m1(), model.split.m2());
    let mut grad_h1 = Vector::zeros(m1);
    let mut grad_h2 = Vector::zeros(m2);
    for (a, b) in model.split.positive.iter().zip(&model.split.negative) {
        let w =
            (a.transpose() * &model.h1 - b.transpose() * Vector::from_element(m2, 1.0)) / p.eta1;
        let u =
            -(a.transpose() * Vector::from_element(m1, 1.0) + b.transpose() * &model.h2) / p.eta2;
        grad_h1 += (a * w).map(|aw| 1.0 - aw - model.b1);
        grad_h2 += (b * u).map(|bu| 1.0 + bu + model.b2);
    }
    grad_h1 -= &model.h1 * p.lambda1;
    grad_h2 -= &model.h2 * p.lambda2;
    let (r_b1, r_b2) = model.bottom_row_residuals();
    Ok(StationarityResiduals {
        r_h1: grad_h1.amax(),
        r_b1: r_b1.abs(),
        r_h2: grad_h2.amax(),
        r_b2: r_b2.abs(),
    })
}

/// `(1/(2 lambda)) ξᵀξ - (ξᵀh - (lambda/2) hᵀh)`, which is `||ξ - lambda h||² / (2 lambda)`:
/// nonnegative for every `ξ` and zero at `ξ = lambda h`.
pub fn conjugate_bound_gap(h: &Vector, xi: &Vector, lambda: f64) -> f64 {
    xi.dot(xi) / (2.0 * lambda) - (xi.dot(h) - 0.5 * lambda * h.dot(h))
}
