use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use twinview_core::eval::{
    evaluate_model, fold_seed, prepare, ConfigOutcome, CvOptions, GridExecutor, ModelKind,
    ViewSource,
};
use twinview_core::stats::rank_row;

use crate::config::{BenchmarkConfig, DatasetSpec};
use crate::csvio::{load_csv, LabelColumn};
use crate::error::{AppError, Result};
use crate::report::{BenchmarkReport, CellStatus, DatasetResult, ModelCell, REPORT_SCHEMA_VERSION};

pub const THREADS_ENV: &str = "TWINVIEW_THREADS";

/// Runs bandwidth tasks on a rayon pool. Results come back in task order.
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads == 0` lets rayon pick.
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| AppError::usage(format!("cannot start worker pool: {e}")))?;
        Ok(RayonExecutor { pool })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(threads_from_env()?)
    }
}

pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) if s.trim().is_empty() => Ok(0),
        Ok(s) => s.trim().parse().map_err(|_| {
            AppError::usage(format!(
                "{THREADS_ENV} must be a nonnegative integer, got '{s}'"
            ))
        }),
    }
}

impl GridExecutor for RayonExecutor {
    fn map(
        &self,
        tasks: usize,
        f: &(dyn Fn(usize) -> Vec<ConfigOutcome> + Sync),
    ) -> Vec<Vec<ConfigOutcome>> {
        self.pool
            .install(|| (0..tasks).into_par_iter().map(f).collect())
    }
}

fn run_dataset(
    spec: &DatasetSpec,
    base: &Path,
    cfg: &BenchmarkConfig,
    kinds: &[ModelKind],
    exec: &dyn GridExecutor,
) -> DatasetResult {
    let path = spec.resolved_path(base);
    let mut result = DatasetResult {
        name: spec.display_name(),
        path: spec.path.to_string_lossy().into_owned(),
        n_samples: None,
        n_train: None,
        n_test: None,
        view_dims: None,
        pca_rank: None,
        error: None,
        cells: kinds.iter().map(|k| ModelCell::absent(k.name())).collect(),
    };
    let source = match &spec.native_views {
        Some(widths) => ViewSource::Native {
            widths: widths.clone(),
        },
        None => ViewSource::PcaSecondView {
            threshold: cfg.pca_threshold,
        },
    };
    let prepared =
        load_csv(&path, &LabelColumn::from_option(spec.label_col.as_deref())).and_then(|d| {
            result.n_samples = Some(d.len());
            prepare(&d, &source, cfg.seed, cfg.stratified).map_err(AppError::from)
        });
    let prepared = match prepared {
        Ok(p) => p,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    result.n_train = Some(prepared.train.len());
    result.n_test = Some(prepared.test.len());
    result.view_dims = Some(prepared.train.view_dims());
    result.pca_rank = prepared.pca.as_ref().map(|p| p.rank());

    let opts = CvOptions {
        folds: cfg.folds,
        seed: fold_seed(cfg.seed),
        variant: cfg.variant,
    };
    for (cell, &kind) in result.cells.iter_mut().zip(kinds) {
        let start = Instant::now();
        let outcome = evaluate_model(&prepared, kind, &cfg.grids, &opts, exec);
        let seconds = cfg.record_timings.then(|| start.elapsed().as_secs_f64());
        match outcome {
            Ok(o) => {
                cell.status = CellStatus::Ok;
                cell.test_accuracy = Some(o.test_accuracy);
                cell.cv_accuracy = Some(o.cv.mean_acc);
                cell.params = Some(o.cv.params);
                cell.configs_evaluated = Some(o.cv.evaluated);
                cell.skipped_folds = Some(o.cv.skipped_folds);
            }
            Err(e) => {
                cell.status = CellStatus::Failed;
                cell.error = Some(e.to_string());
            }
        }
        cell.seconds = seconds;
    }
    result
}

/// Every dataset of the config in order; failures are recorded in the
/// report and the run continues.
pub fn run_benchmark(
    cfg: &BenchmarkConfig,
    base: &Path,
    exec: &dyn GridExecutor,
) -> Result<BenchmarkReport> {
    let kinds = cfg.model_kinds()?;
    let datasets = cfg
        .datasets
        .iter()
        .map(|spec| run_dataset(spec, base, cfg, &kinds, exec))
        .collect();
    Ok(BenchmarkReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed: cfg.seed,
        variant: cfg.variant,
        folds: cfg.folds,
        pca_threshold: cfg.pca_threshold,
        grids: cfg.grids.clone(),
        models: kinds.iter().map(|k| k.name().to_string()).collect(),
        datasets,
        external: None,
    })
}

fn pad(s: &str, w: usize) -> String {
    format!("{s:>w$}")
}

/// Datasets x models accuracy table in percent with `Average Acc` and
/// `Average Rank` footers. Ranks use only datasets where every model ran.
pub fn render_summary(report: &BenchmarkReport) -> String {
    let name_w = report
        .datasets
        .iter()
        .map(|d| d.name.len())
        .chain(["Average Rank".len()])
        .max()
        .unwrap_or(12);
    let col_w = report
        .models
        .iter()
        .map(|m| m.len())
        .chain([8])
        .max()
        .unwrap_or(8);
    let mut out = format!("{:<name_w$}", "Dataset");
    for m in &report.models {
        out.push_str(&format!("  {}", pad(m, col_w)));
    }
    out.push('\n');
    let l = report.models.len();
    let mut sums = vec![0.0; l];
    let mut counts = vec![0usize; l];
    for d in &report.datasets {
        out.push_str(&format!("{:<name_w$}", d.name));
        for (j, c) in d.cells.iter().enumerate() {
            let cell = match (c.status, c.test_accuracy) {
                (CellStatus::Ok, Some(a)) => {
                    sums[j] += a;
                    counts[j] += 1;
                    format!("{:.2}", 100.0 * a)
                }
                (CellStatus::Failed, _) => "failed".to_string(),
                _ => "-".to_string(),
            };
            out.push_str(&format!("  {}", pad(&cell, col_w)));
        }
        out.push('\n');
    }
    out.push_str(&format!("{:<name_w$}", "Average Acc"));
    for j in 0..l {
        let cell = if counts[j] > 0 {
            format!("{:.2}", 100.0 * sums[j] / counts[j] as f64)
        } else {
            "-".to_string()
        };
        out.push_str(&format!("  {}", pad(&cell, col_w)));
    }
    out.push('\n');
    out.push_str(&format!("{:<name_w$}", "Average Rank"));
    let ranks = report
        .accuracy_table()
        .ok()
        .filter(|t| t.n_datasets() > 0)
        .map(|t| {
            let rows: Vec<Vec<f64>> = t.values.iter().map(|r| rank_row(r)).collect();
            (0..l)
                .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64)
                .collect::<Vec<_>>()
        });
    for j in 0..l {
        let cell = ranks
            .as_ref()
            .map_or("-".to_string(), |r| format!("{:.2}", r[j]));
        out.push_str(&format!("  {}", pad(&cell, col_w)));
    }
    out.push('\n');
    out
}
