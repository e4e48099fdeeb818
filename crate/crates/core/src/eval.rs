//! Accuracy, grid-searched k-fold cross-validation, sensitivity sweeps and
//! the per-dataset evaluation pipeline.
//!
//! Grid search computes one view-summed Gram matrix over the whole training
//! set per bandwidth; every fold and every `(eta, lambda)` pair then works on
//! sub-blocks of it. Configurations are visited with each grid sorted
//! ascending (sigma outermost, then eta, then lambda) and the first
//! configuration with the highest mean fold accuracy wins, so ties go to the
//! smaller parameters.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{standardize, Dataset, Label, MultiviewDataset};
use crate::error::{Error, Result};
use crate::kernel::{multiview_gram, KernelSpec};
use crate::mvrkm::{self, MvrkmParams};
use crate::pca::{make_second_view, PcaTransform};
use crate::split::{kfold, split_70_30, split_70_30_stratified, SplitPlan};
use crate::tmvrkm::{self, sign_label, ClassSplit, TmvrkmParams, TwinGrams, Variant};
use crate::{Matrix, Vector};

/// Fraction of positions where `pred` and `truth` agree.
pub fn accuracy(pred: &[Label], truth: &[Label]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::dim("accuracy", truth.len(), pred.len()));
    }
    if truth.is_empty() {
        return Err(Error::Config("accuracy of an empty label vector".into()));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tmvrkm,
    Mvrkm,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Tmvrkm => "tmvrkm",
            ModelKind::Mvrkm => "mvrkm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tmvrkm" => Some(ModelKind::Tmvrkm),
            "mvrkm" => Some(ModelKind::Mvrkm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Tmvrkm(TmvrkmParams),
    Mvrkm(MvrkmParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Tmvrkm(_) => ModelKind::Tmvrkm,
            ModelParams::Mvrkm(_) => ModelKind::Mvrkm,
        }
    }

    pub fn kernel(&self) -> KernelSpec {
        match self {
            ModelParams::Tmvrkm(p) => p.kernel,
            ModelParams::Mvrkm(p) => p.kernel,
        }
    }
}

pub fn default_sigma_grid() -> Vec<f64> {
    (-5..=5).map(|k| libm::ldexp(1.0, k)).collect()
}

pub fn default_penalty_grid() -> Vec<f64> {
    vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0, 1e1, 1e2, 1e3, 1e4, 1e5]
}

/// RBF bandwidths and penalty grids. With `tie_eta` / `tie_lambda` the two
/// hyperplanes of the twin model share one value; otherwise every pair is
/// tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub sigma: Vec<f64>,
    pub eta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub tie_eta: bool,
    pub tie_lambda: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            sigma: default_sigma_grid(),
            eta: default_penalty_grid(),
            lambda: default_penalty_grid(),
            tie_eta: true,
            tie_lambda: true,
        }
    }
}

impl GridSpec {
    pub fn single(sigma: f64, eta: f64, lambda: f64) -> Self {
        GridSpec {
            sigma: vec![sigma],
            eta: vec![eta],
            lambda: vec![lambda],
            ..GridSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("sigma", &self.sigma),
            ("eta", &self.eta),
            ("lambda", &self.lambda),
        ] {
            if g.is_empty() {
                return Err(Error::Config(format!("{name} grid is empty")));
            }
            if let Some(v) = g.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::Config(format!(
                    "{name} grid contains non-positive value {v}"
                )));
            }
        }
        Ok(())
    }

    fn sorted(&self) -> GridSpec {
        let sort = |g: &Vec<f64>| {
            let mut g = g.clone();
            g.sort_by(f64::total_cmp);
            g
        };
        GridSpec {
            sigma: sort(&self.sigma),
            eta: sort(&self.eta),
            lambda: sort(&self.lambda),
            tie_eta: self.tie_eta,
            tie_lambda: self.tie_lambda,
        }
    }

    fn pairs(values: &[f64], tied: bool) -> Vec<(f64, f64)> {
        if tied {
            values.iter().map(|&v| (v, v)).collect()
        } else {
            values
                .iter()
                .flat_map(|&a| values.iter().map(move |&b| (a, b)))
                .collect()
        }
    }

    /// Number of configurations grid search evaluates for `kind`.
    pub fn n_configs(&self, kind: ModelKind) -> usize {
        let n = |g: &Vec<f64>, tied: bool| if tied { g.len() } else { g.len() * g.len() };
        match kind {
            ModelKind::Tmvrkm => {
                self.sigma.len() * n(&self.eta, self.tie_eta) * n(&self.lambda, self.tie_lambda)
            }
            ModelKind::Mvrkm => self.sigma.len() * self.eta.len() * self.lambda.len(),
        }
    }

    fn configs_for_sigma(&self, kind: ModelKind, sigma: f64, variant: Variant) -> Vec<ModelParams> {
        let kernel = KernelSpec::rbf(sigma);
        match kind {
            ModelKind::Tmvrkm => {
                let lambdas = Self::pairs(&self.lambda, self.tie_lambda);
                Self::pairs(&self.eta, self.tie_eta)
                    .into_iter()
                    .flat_map(|(eta1, eta2)| {
                        lambdas.iter().map(move |&(lambda1, lambda2)| {
                            ModelParams::Tmvrkm(TmvrkmParams {
                                eta1,
                                eta2,
                                lambda1,
                                lambda2,
                                kernel,
                                variant,
                            })
                        })
                    })
                    .collect()
            }
            ModelKind::Mvrkm => self
                .eta
                .iter()
                .flat_map(|&eta| {
                    self.lambda.iter().map(move |&lambda| {
                        ModelParams::Mvrkm(MvrkmParams {
                            eta,
                            lambda,
                            kernel,
                        })
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub seed: u64,
    pub variant: Variant,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            folds: 5,
            seed: 0,
            variant: Variant::default(),
        }
    }
}

/// Fold accuracies of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigOutcome {
    pub params: ModelParams,
    pub fold_accs: Vec<f64>,
    pub skipped_folds: usize,
}

/// Winning configuration of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub params: ModelParams,
    pub mean_acc: f64,
    pub fold_accs: Vec<f64>,
    pub skipped_folds: usize,
    /// Configurations evaluated in total.
    pub evaluated: usize,
}

/// Runs one task per bandwidth. Implementations may run tasks concurrently
/// but must return the results in task order.
pub trait GridExecutor {
    fn map(
        &self,
        tasks: usize,
        f: &(dyn Fn(usize) -> Vec<ConfigOutcome> + Sync),
    ) -> Vec<Vec<ConfigOutcome>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl GridExecutor for Sequential {
    fn map(
        &self,
        tasks: usize,
        f: &(dyn Fn(usize) -> Vec<ConfigOutcome> + Sync),
    ) -> Vec<Vec<ConfigOutcome>> {
        (0..tasks).map(f).collect()
    }
}

struct FoldPlan {
    train: Vec<usize>,
    positive: Vec<usize>,
    negative: Vec<usize>,
    validation: Vec<usize>,
}

impl FoldPlan {
    fn usable(&self) -> bool {
        !self.positive.is_empty() && !self.negative.is_empty()
    }
}

/// A fixed fold partition of one training set together with the sorted grid.
pub struct CvPlan<'a> {
    data: &'a MultiviewDataset,
    kind: ModelKind,
    grid: GridSpec,
    variant: Variant,
    folds: Vec<FoldPlan>,
}

impl<'a> CvPlan<'a> {
    pub fn new(
        data: &'a MultiviewDataset,
        kind: ModelKind,
        grid: &GridSpec,
        opts: &CvOptions,
    ) -> Result<Self> {
        grid.validate()?;
        let n = data.len();
        let all: Vec<usize> = (0..n).collect();
        let folds = kfold(&all, opts.folds, opts.seed)?
            .into_iter()
            .map(|validation| {
                let mut held_out = vec![false; n];
                validation.iter().for_each(|&i| held_out[i] = true);
                let train: Vec<usize> = (0..n).filter(|&i| !held_out[i]).collect();
                let (positive, negative) = train.iter().partition(|&&i| data.labels[i] == 1);
                FoldPlan {
                    train,
                    positive,
                    negative,
                    validation,
                }
            })
            .collect();
        Ok(CvPlan {
            data,
            kind,
            grid: grid.sorted(),
            variant: opts.variant,
            folds,
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.grid.sigma
    }

    fn truth(&self, idx: &[usize]) -> Vec<Label> {
        idx.iter().map(|&i| self.data.labels[i]).collect()
    }

    /// Fold accuracies of every configuration sharing the `sigma_index`-th bandwidth.
    pub fn evaluate_sigma(&self, sigma_index: usize) -> Vec<ConfigOutcome> {
        let sigma = self.grid.sigma[sigma_index];
        let configs = self.grid.configs_for_sigma(self.kind, sigma, self.variant);
        let mut outcomes: Vec<ConfigOutcome> = configs
            .into_iter()
            .map(|params| ConfigOutcome {
                params,
                fold_accs: Vec::new(),
                skipped_folds: 0,
            })
            .collect();
        let gram = match multiview_gram(&self.data.views, &self.data.views, &KernelSpec::rbf(sigma))
        {
            Ok(g) => g,
            Err(_) => {
                outcomes
                    .iter_mut()
                    .for_each(|o| o.skipped_folds = self.folds.len());
                return outcomes;
            }
        };
        let views = self.data.n_views();
        let block = |rows: &[usize], cols: &[usize]| gram.select_rows(rows).select_columns(cols);
        for fold in &self.folds {
            if !fold.usable() {
                outcomes.iter_mut().for_each(|o| o.skipped_folds += 1);
                continue;
            }
            let truth = self.truth(&fold.validation);
            match self.kind {
                ModelKind::Tmvrkm => {
                    let grams = TwinGrams {
                        aa: block(&fold.positive, &fold.positive),
                        ab: block(&fold.positive, &fold.negative),
                        bb: block(&fold.negative, &fold.negative),
                    };
                    let xa = block(&fold.validation, &fold.positive);
                    let xb = block(&fold.validation, &fold.negative);
                    for o in outcomes.iter_mut() {
                        let ModelParams::Tmvrkm(p) = o.params else {
                            unreachable!()
                        };
                        let acc = tmvrkm::solve_twin(&grams, views, &p).ok().and_then(|sol| {
                            let pred: Vec<Label> = tmvrkm::twin_scores(&sol, &xa, &xb, &p)
                                .into_iter()
                                .map(|(f1, f2)| sign_label(f1 + f2))
                                .collect();
                            accuracy(&pred, &truth).ok()
                        });
                        record(o, acc);
                    }
                }
                ModelKind::Mvrkm => {
                    let train_gram = block(&fold.train, &fold.train);
                    let cross = block(&fold.validation, &fold.train);
                    let y = Vector::from_iterator(
                        fold.train.len(),
                        fold.train.iter().map(|&i| f64::from(self.data.labels[i])),
                    );
                    for o in outcomes.iter_mut() {
                        let ModelParams::Mvrkm(p) = o.params else {
                            unreachable!()
                        };
                        let acc = mvrkm::solve_from_gram(&train_gram, &y, views, &p)
                            .ok()
                            .and_then(|(z, b)| {
                                let pred: Vec<Label> = mvrkm::scores_from_gram(&cross, &z, b, &p)
                                    .into_iter()
                                    .map(sign_label)
                                    .collect();
                                accuracy(&pred, &truth).ok()
                            });
                        record(o, acc);
                    }
                }
            }
        }
        outcomes
    }

    /// Picks the first configuration with the highest mean fold accuracy.
    pub fn select(&self, outcomes: Vec<Vec<ConfigOutcome>>) -> Result<CvResult> {
        let evaluated = outcomes.iter().map(Vec::len).sum();
        let mut best: Option<CvResult> = None;
        for o in outcomes.into_iter().flatten() {
            if o.fold_accs.is_empty() {
                continue;
            }
            let mean = o.fold_accs.iter().sum::<f64>() / o.fold_accs.len() as f64;
            if best.as_ref().is_none_or(|b| mean > b.mean_acc) {
                best = Some(CvResult {
                    params: o.params,
                    mean_acc: mean,
                    fold_accs: o.fold_accs,
                    skipped_folds: o.skipped_folds,
                    evaluated,
                });
            }
        }
        best.ok_or_else(|| {
            Error::Tuning(format!(
                "all {evaluated} configurations failed on every fold of '{}'",
                self.data.name
            ))
        })
    }
}

fn record(o: &mut ConfigOutcome, acc: Option<f64>) {
    match acc {
        Some(a) => o.fold_accs.push(a),
        None => o.skipped_folds += 1,
    }
}

pub fn grid_search_with(
    train: &MultiviewDataset,
    kind: ModelKind,
    grid: &GridSpec,
    opts: &CvOptions,
    exec: &dyn GridExecutor,
) -> Result<CvResult> {
    let plan = CvPlan::new(train, kind, grid, opts)?;
    let outcomes = exec.map(plan.sigmas().len(), &|i| plan.evaluate_sigma(i));
    plan.select(outcomes)
}

/// Sequential grid search.
pub fn grid_search(
    train: &MultiviewDataset,
    kind: ModelKind,
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<CvResult> {
    grid_search_with(train, kind, grid, opts, &Sequential)
}

/// Fits `params` on `train` and returns the predicted test labels.
pub fn fit_predict(
    params: &ModelParams,
    train: &MultiviewDataset,
    test_views: &[Matrix],
) -> Result<Vec<Label>> {
    match params {
        ModelParams::Tmvrkm(p) => {
            tmvrkm::fit(&ClassSplit::from_dataset(train)?, p)?.predict(test_views)
        }
        ModelParams::Mvrkm(p) => mvrkm::fit_mvrkm(train, p)?.predict(test_views),
    }
}

/// Test accuracies of the twin model over an `eta × sigma` grid, with
/// `eta1 = eta2` and fixed `lambda1 = lambda2 = lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub etas: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// `accuracy[i][j]` is for `etas[i]`, `sigmas[j]`; `None` marks a failed fit.
    pub accuracy: Vec<Vec<Option<f64>>>,
}

impl SweepGrid {
    pub fn max(&self) -> Option<f64> {
        self.accuracy
            .iter()
            .flatten()
            .flatten()
            .copied()
            .reduce(f64::max)
    }
}

pub fn sensitivity_sweep(
    train: &MultiviewDataset,
    test: &MultiviewDataset,
    eta_grid: &[f64],
    sigma_grid: &[f64],
    lambda: f64,
    variant: Variant,
) -> Result<SweepGrid> {
    if eta_grid.is_empty() || sigma_grid.is_empty() {
        return Err(Error::Config("sweep grids must be nonempty".into()));
    }
    let split = ClassSplit::from_dataset(train)?;
    if test.n_views() != split.n_views() || test.view_dims() != split.view_dims() {
        return Err(Error::ViewMismatch(format!(
            "train views {:?} vs test views {:?}",
            split.view_dims(),
            test.view_dims()
        )));
    }
    let mut accuracy = vec![vec![None; sigma_grid.len()]; eta_grid.len()];
    for (j, &sigma) in sigma_grid.iter().enumerate() {
        let kernel = KernelSpec::rbf(sigma);
        let Ok(grams) = TwinGrams::compute(&split, &kernel) else {
            continue;
        };
        let xa = multiview_gram(&test.views, &split.positive, &kernel)?;
        let xb = multiview_gram(&test.views, &split.negative, &kernel)?;
        for (i, &eta) in eta_grid.iter().enumerate() {
            let p = TmvrkmParams::tied(eta, lambda, kernel).with_variant(variant);
            if p.validate().is_err() {
                continue;
            }
            accuracy[i][j] = tmvrkm::solve_twin(&grams, split.n_views(), &p)
                .ok()
                .and_then(|sol| {
                    let pred: Vec<Label> = tmvrkm::twin_scores(&sol, &xa, &xb, &p)
                        .into_iter()
                        .map(|(f1, f2)| sign_label(f1 + f2))
                        .collect();
                    accuracy_of(&pred, &test.labels)
                });
        }
    }
    Ok(SweepGrid {
        etas: eta_grid.to_vec(),
        sigmas: sigma_grid.to_vec(),
        accuracy,
    })
}

fn accuracy_of(pred: &[Label], truth: &[Label]) -> Option<f64> {
    accuracy(pred, truth).ok()
}

/// How the views of a dataset are obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewSource {
    /// View A is the standardized features, view B their principal scores
    /// at this explained-variance threshold.
    PcaSecondView { threshold: f64 },
    /// The feature columns already hold several views of these widths.
    Native { widths: Vec<usize> },
}

/// Standardized train/test views of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub train: MultiviewDataset,
    pub test: MultiviewDataset,
    pub plan: SplitPlan,
    pub pca: Option<PcaTransform>,
}

/// Split 70:30, standardize with training statistics, then build the views.
/// Nothing fitted here ever sees a test row.
pub fn prepare(
    dataset: &Dataset,
    source: &ViewSource,
    seed: u64,
    stratified: bool,
) -> Result<PreparedData> {
    let plan = if stratified {
        split_70_30_stratified(&dataset.labels, seed)?
    } else {
        split_70_30(dataset.len(), seed)?
    };
    let train = dataset.select(&plan.train);
    let test = dataset.select(&plan.test);
    let scaled = standardize(&train.features, &test.features)?;
    let train = Dataset {
        features: scaled.train,
        ..train
    };
    let test = Dataset {
        features: scaled.test,
        ..test
    };
    let (train, test, pca) = match source {
        ViewSource::PcaSecondView { threshold } => {
            let (tr, te, pca) = make_second_view(&train, &test, *threshold)?;
            (tr, te, Some(pca))
        }
        ViewSource::Native { widths } => {
            (train.into_views(widths)?, test.into_views(widths)?, None)
        }
    };
    Ok(PreparedData {
        train,
        test,
        plan,
        pca,
    })
}

/// Grid search on the training part, refit with the winner, score on test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub cv: CvResult,
    pub test_accuracy: f64,
}

pub fn evaluate_model(
    prepared: &PreparedData,
    kind: ModelKind,
    grid: &GridSpec,
    opts: &CvOptions,
    exec: &dyn GridExecutor,
) -> Result<ModelOutcome> {
    let cv = grid_search_with(&prepared.train, kind, grid, opts, exec)?;
    let pred = fit_predict(&cv.params, &prepared.train, &prepared.test.views)?;
    let test_accuracy = accuracy(&pred, &prepared.test.labels)?;
    Ok(ModelOutcome { cv, test_accuracy })
}

/// Seed used for the fold plan of a dataset split with `seed`.
pub fn fold_seed(seed: u64) -> u64 {
    seed.wrapping_add(1)
}

pub fn describe(params: &ModelParams) -> String {
    match params {
        ModelParams::Tmvrkm(p) => format!(
            "sigma={} eta1={} eta2={} lambda1={} lambda2={}",
            p.kernel.sigma, p.eta1, p.eta2, p.lambda1, p.lambda2
        ),
        ModelParams::Mvrkm(p) => {
            format!("sigma={} eta={} lambda={}", p.kernel.sigma, p.eta, p.lambda)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, -1, 1], &[1, -1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, -1, 1], &[-1, 1, -1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 1, 1, -1], &[1, 1, 1, 1]).unwrap(), 0.75);
        assert!(matches!(
            accuracy(&[1], &[1, 1]),
            Err(Error::Dimension { .. })
        ));
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn default_grids() {
        let g = GridSpec::default();
        assert_eq!(g.sigma.len(), 11);
        assert_eq!(g.sigma[0], 1.0 / 32.0);
        assert_eq!(g.sigma[10], 32.0);
        assert_eq!(g.n_configs(ModelKind::Tmvrkm), 11 * 11 * 11);
        let untied = GridSpec {
            tie_eta: false,
            ..g.clone()
        };
        assert_eq!(untied.n_configs(ModelKind::Tmvrkm), 11 * 121 * 11);
        assert_eq!(untied.n_configs(ModelKind::Mvrkm), 11 * 11 * 11);
    }

    #[test]
    fn grid_validation() {
        let mut g = GridSpec::default();
        g.eta.clear();
        assert!(g.validate().is_err());
        let mut g = GridSpec::default();
        g.sigma.push(-1.0);
        assert!(g.validate().is_err());
    }

    #[test]
    fn model_kind_names() {
        assert_eq!(ModelKind::parse("TMvRKM"), Some(ModelKind::Tmvrkm));
        assert_eq!(ModelKind::parse("svm"), None);
        assert_eq!(ModelKind::Mvrkm.name(), "mvrkm");
    }
}
