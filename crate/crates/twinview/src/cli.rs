//! Command-line interface. Exit codes: 0 success, 1 usage, 2 data error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use twinview_core::data::Label;
use twinview_core::eval::{
    accuracy, default_penalty_grid, default_sigma_grid, fold_seed, grid_search_with, prepare,
    sensitivity_sweep, CvOptions, GridSpec, ModelKind, ModelParams, ViewSource,
};
use twinview_core::kernel::KernelSpec;
use twinview_core::mvrkm::{fit_mvrkm, MvrkmParams};
use twinview_core::pca::PcaTransform;
use twinview_core::stats::{
    compare, friedman_chi2, friedman_f, AccuracyTable, ComparisonReport, Scale, DEFAULT_Q_ALPHA,
};
use twinview_core::tmvrkm::{fit, ClassSplit, TmvrkmParams, Variant};

use crate::bench::{render_summary, run_benchmark, RayonExecutor};
use crate::config::BenchmarkConfig;
use crate::csvio::{self, LabelColumn};
use crate::error::{AppError, Result};
use crate::model_io::{load_model, matrix_rows, save_model, FittedModel};
use crate::report::{load_report, save_report, ExternalColumns};
use crate::sweep_io::sweep_to_csv;

#[derive(Debug, Parser)]
#[command(
    name = "twinview",
    version,
    about = "Twin multiview restricted kernel machine classifiers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split, standardize and build the views of a CSV dataset.
    Prepare(PrepareArgs),
    /// Fit a model on a prepared bundle and save it as JSON.
    Fit(FitArgs),
    /// Predict labels for a bundle with a saved model.
    Predict(PredictArgs),
    /// Run a benchmark described by a JSON config.
    Benchmark(BenchmarkArgs),
    /// Test accuracy over an eta x sigma grid.
    Sweep(SweepArgs),
    /// Ranks, Friedman statistics and Nemenyi critical difference of an accuracy table.
    Stats(StatsArgs),
    /// Summarize a saved benchmark report, optionally importing external columns.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    AsPublished,
    DerivationConsistent,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::AsPublished => Variant::AsPublished,
            VariantArg::DerivationConsistent => Variant::DerivationConsistent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Tmvrkm,
    Mvrkm,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Tmvrkm => ModelKind::Tmvrkm,
            ModelArg::Mvrkm => ModelKind::Mvrkm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Linear,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Dataset CSV; an optional header row, labels in the last column by default.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory for `train/`, `test/` and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Explained-variance threshold for the PCA second view.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Header name of the label column.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Column widths of views already present in the file, e.g. `3,2`.
    #[arg(long, value_delimiter = ',')]
    pub native_views: Option<Vec<usize>>,
    /// Keep the class proportions in both parts of the split.
    #[arg(long)]
    pub stratified: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Training bundle directory.
    #[arg(long)]
    pub data: PathBuf,
    /// Output model JSON.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "tmvrkm")]
    pub model_type: ModelArg,
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// eta (eta1 for tmvrkm).
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// lambda (lambda1 for tmvrkm).
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Defaults to --eta.
    #[arg(long)]
    pub eta2: Option<f64>,
    /// Defaults to --lambda.
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long, value_enum, default_value = "derivation-consistent")]
    pub variant: VariantArg,
    /// Choose hyperparameters by cross-validated grid search over the default grids instead.
    #[arg(long)]
    pub tune: bool,
    /// Fold seed for --tune.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Bundle directory; `labels.csv` is optional and enables the accuracy line.
    #[arg(long)]
    pub data: PathBuf,
    /// Label CSV to write; standard output otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report JSON to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated eta values; 1e-5 ... 1e5 by default.
    #[arg(long, value_delimiter = ',')]
    pub etas: Option<Vec<f64>>,
    /// Comma-separated sigma values; 2^-5 ... 2^5 by default.
    #[arg(long, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "derivation-consistent")]
    pub variant: VariantArg,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Accuracy CSV: header `dataset,<model>,...`, one row per dataset.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value_t = DEFAULT_Q_ALPHA)]
    pub qalpha: f64,
    /// Table values are percentages.
    #[arg(long)]
    pub percent: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Accuracy CSV of externally run models to import.
    #[arg(long)]
    pub external: Option<PathBuf>,
    /// External values are percentages.
    #[arg(long)]
    pub percent: bool,
    /// Where to write the report with the imported columns.
    #[arg(long, requires = "external")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_Q_ALPHA)]
    pub qalpha: f64,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Benchmark(a) => cmd_benchmark(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Stats(a) => cmd_stats(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("finite values");
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaRecord {
    pub threshold: f64,
    pub rank: usize,
    pub explained_ratio: Vec<f64>,
    pub mean: Vec<f64>,
    /// `rank` rows of length `d`.
    pub components: Vec<Vec<f64>>,
}

impl PcaRecord {
    fn new(t: &PcaTransform, threshold: f64) -> Self {
        PcaRecord {
            threshold,
            rank: t.rank(),
            explained_ratio: t.explained_ratio.clone(),
            mean: t.mean.iter().copied().collect(),
            components: matrix_rows(&t.components),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub input: String,
    pub seed: u64,
    pub stratified: bool,
    pub n_samples: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub view_dims: Vec<usize>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub pca: Option<PcaRecord>,
}

fn cmd_prepare(a: &PrepareArgs) -> Result<()> {
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        return Err(AppError::usage(format!(
            "--threshold must lie in (0, 1], got {}",
            a.threshold
        )));
    }
    let data = csvio::load_csv(&a.input, &LabelColumn::from_option(a.label_col.as_deref()))?;
    let source = match &a.native_views {
        Some(w) => ViewSource::Native { widths: w.clone() },
        None => ViewSource::PcaSecondView {
            threshold: a.threshold,
        },
    };
    let prepared = prepare(&data, &source, a.seed, a.stratified)?;
    csvio::write_bundle(&a.out.join("train"), &prepared.train)?;
    csvio::write_bundle(&a.out.join("test"), &prepared.test)?;
    let manifest = Manifest {
        schema_version: 1,
        input: a.input.to_string_lossy().into_owned(),
        seed: a.seed,
        stratified: a.stratified,
        n_samples: data.len(),
        n_train: prepared.train.len(),
        n_test: prepared.test.len(),
        view_dims: prepared.train.view_dims(),
        train_indices: prepared.plan.train.clone(),
        test_indices: prepared.plan.test.clone(),
        pca: prepared
            .pca
            .as_ref()
            .map(|t| PcaRecord::new(t, a.threshold)),
    };
    write_json(&a.out.join("manifest.json"), &manifest)?;
    println!(
        "train {} rows, test {} rows, views {:?}{}",
        manifest.n_train,
        manifest.n_test,
        manifest.view_dims,
        manifest
            .pca
            .as_ref()
            .map_or(String::new(), |p| format!(", PCA rank {}", p.rank))
    );
    Ok(())
}

fn kernel_of(a: &FitArgs) -> KernelSpec {
    match a.kernel {
        KernelArg::Rbf => KernelSpec::rbf(a.sigma),
        KernelArg::Linear => KernelSpec::linear(),
    }
}

fn cmd_fit(a: &FitArgs) -> Result<()> {
    let data = csvio::read_bundle(&a.data)?;
    let kind = ModelKind::from(a.model_type);
    let variant = Variant::from(a.variant);
    let params = if a.tune {
        let opts = CvOptions {
            folds: a.folds,
            seed: fold_seed(a.seed),
            variant,
        };
        let exec = RayonExecutor::from_env()?;
        let cv = grid_search_with(&data, kind, &GridSpec::default(), &opts, &exec)?;
        println!(
            "cv accuracy {} over {} configurations",
            cv.mean_acc, cv.evaluated
        );
        cv.params
    } else {
        let kernel = kernel_of(a);
        match kind {
            ModelKind::Tmvrkm => ModelParams::Tmvrkm(TmvrkmParams {
                eta1: a.eta,
                eta2: a.eta2.unwrap_or(a.eta),
                lambda1: a.lambda,
                lambda2: a.lambda2.unwrap_or(a.lambda),
                kernel,
                variant,
            }),
            ModelKind::Mvrkm => ModelParams::Mvrkm(MvrkmParams::new(a.eta, a.lambda, kernel)),
        }
    };
    let invalid = |e: twinview_core::Error| AppError::usage(e.to_string());
    let model = match params {
        ModelParams::Tmvrkm(p) => {
            p.validate().map_err(invalid)?;
            FittedModel::Tmvrkm(fit(&ClassSplit::from_dataset(&data)?, &p)?)
        }
        ModelParams::Mvrkm(p) => {
            p.validate().map_err(invalid)?;
            FittedModel::Mvrkm(fit_mvrkm(&data, &p)?)
        }
    };
    save_model(&a.model, &model)?;
    let acc = accuracy(&model.predict(&data.views)?, &data.labels)?;
    println!("{}", twinview_core::eval::describe(&params));
    println!("training accuracy {acc}");
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let views = csvio::read_bundle_views(&a.data)?;
    let pred = model.predict(&views)?;
    let text: String = pred.iter().map(|l| format!("{l}\n")).collect();
    match &a.out {
        Some(p) => csvio::write_text(p, &text)?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| AppError::io(Path::new("<stdout>"), e))?,
    }
    let labels_path = a.data.join(csvio::LABELS_FILE);
    if labels_path.exists() {
        let truth: Vec<Label> = csvio::read_labels(&labels_path)?;
        eprintln!("accuracy {}", accuracy(&pred, &truth)?);
    }
    Ok(())
}

fn cmd_benchmark(a: &BenchmarkArgs) -> Result<()> {
    let cfg = BenchmarkConfig::load(&a.config)?;
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let exec = RayonExecutor::from_env()?;
    let report = run_benchmark(&cfg, &base, &exec)?;
    save_report(&a.out, &report)?;
    print!("{}", render_summary(&report));
    for d in &report.datasets {
        if let Some(e) = &d.error {
            eprintln!("{}: {e}", d.name);
        }
        for c in &d.cells {
            if let Some(e) = &c.error {
                eprintln!("{} / {}: {e}", d.name, c.model);
            }
        }
    }
    if !report.datasets.is_empty() && report.datasets.iter().all(|d| d.failed()) {
        return Err(AppError::AllDatasetsFailed);
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        return Err(AppError::usage(format!(
            "--lambda must be positive, got {}",
            a.lambda
        )));
    }
    let etas = a.etas.clone().unwrap_or_else(default_penalty_grid);
    let sigmas = a.sigmas.clone().unwrap_or_else(default_sigma_grid);
    if etas
        .iter()
        .chain(&sigmas)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(AppError::usage(
            "--etas and --sigmas values must be positive",
        ));
    }
    let train = csvio::read_bundle(&a.train)?;
    let test = csvio::read_bundle(&a.test)?;
    let grid = sensitivity_sweep(&train, &test, &etas, &sigmas, a.lambda, a.variant.into())?;
    csvio::write_text(&a.out, &sweep_to_csv(&grid))?;
    match grid.max() {
        Some(m) => println!(
            "{} x {} grid, best test accuracy {m}",
            etas.len(),
            sigmas.len()
        ),
        None => return Err(twinview_core::Error::Tuning("every sweep cell failed".into()).into()),
    }
    Ok(())
}

/// Human-readable form of a comparison.
pub fn render_comparison(c: &ComparisonReport) -> String {
    let mut out = String::new();
    let w = c
        .model_names
        .iter()
        .map(|m| m.len())
        .max()
        .unwrap_or(5)
        .max(5);
    out.push_str(&format!(
        "datasets K = {}, models l = {}\n",
        c.ranks.k, c.ranks.l
    ));
    out.push_str("Average ranks:\n");
    for (m, r) in c.model_names.iter().zip(&c.ranks.avg_ranks) {
        out.push_str(&format!("  {m:<w$}  {r:.4}\n"));
    }
    out.push_str(&format!(
        "Friedman chi2 = {:.4} (d.o.f. {})\n",
        c.chi2, c.chi2_df
    ));
    match &c.friedman_f {
        Some(f) => out.push_str(&format!(
            "Friedman F_F = {:.4} (d.o.f. {}, {})\n",
            f.value, f.df1, f.df2
        )),
        None => out.push_str("Friedman F_F undefined\n"),
    }
    let rounded: Vec<f64> = c
        .ranks
        .avg_ranks
        .iter()
        .map(|r| (r * 100.0).round() / 100.0)
        .collect();
    let chi2_rounded = friedman_chi2(&rounded, c.ranks.k);
    out.push_str(&format!(
        "From ranks rounded to 2 decimals: chi2 = {chi2_rounded:.4}"
    ));
    if let Ok(f) = friedman_f(chi2_rounded, c.ranks.k, c.ranks.l) {
        out.push_str(&format!(", F_F = {:.4}", f.value));
    }
    out.push('\n');
    out.push_str(&format!(
        "Nemenyi C.D. = {:.4} (q_alpha = {})\n",
        c.cd, c.q_alpha
    ));
    out.push_str("Significant rank differences (|R_i - R_j| > C.D.):\n");
    out.push_str(&format!("  {:<w$}", ""));
    for m in &c.model_names {
        out.push_str(&format!("  {m:>w$}"));
    }
    out.push('\n');
    for (i, m) in c.model_names.iter().enumerate() {
        out.push_str(&format!("  {m:<w$}"));
        for j in 0..c.model_names.len() {
            let mark = if i == j {
                "-".to_string()
            } else if c.significant[i][j] {
                format!("{:.2}*", c.rank_gaps[i][j])
            } else {
                format!("{:.2}", c.rank_gaps[i][j])
            };
            out.push_str(&format!("  {mark:>w$}"));
        }
        out.push('\n');
    }
    for n in &c.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    out
}

fn check_shape(t: &AccuracyTable) -> Result<()> {
    if t.n_models() < 2 {
        return Err(AppError::usage(format!(
            "need at least 2 model columns, found {}",
            t.n_models()
        )));
    }
    if t.n_datasets() < 2 {
        return Err(AppError::usage(format!(
            "need at least 2 datasets, found {}",
            t.n_datasets()
        )));
    }
    Ok(())
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    if !(a.qalpha >= 0.0 && a.qalpha.is_finite()) {
        return Err(AppError::usage(format!(
            "--qalpha must be nonnegative, got {}",
            a.qalpha
        )));
    }
    let scale = if a.percent {
        Scale::Percent
    } else {
        Scale::Fraction
    };
    let (models, names, values) = csvio::read_table_cells(&a.table)?;
    if models.len() < 2 {
        return Err(AppError::usage(format!(
            "need at least 2 model columns, found {}",
            models.len()
        )));
    }
    let table = AccuracyTable::new(values, models, names, scale)?;
    check_shape(&table)?;
    print!("{}", render_comparison(&compare(&table, a.qalpha)?));
    Ok(())
}

/// Benchmarked and external columns over the datasets both cover fully.
fn combined_table(
    report: &crate::report::BenchmarkReport,
    ext: &ExternalColumns,
) -> twinview_core::Result<Option<AccuracyTable>> {
    let own = report.accuracy_table()?;
    let ext_table = AccuracyTable::new(
        ext.values.clone(),
        ext.model_names.clone(),
        ext.dataset_names.clone(),
        ext.scale,
    )?;
    let mut values = Vec::new();
    let mut names = Vec::new();
    for (name, row) in own.dataset_names.iter().zip(&own.values) {
        if let Some(i) = ext_table.dataset_names.iter().position(|n| n == name) {
            names.push(name.clone());
            values.push(ext_table.values[i].iter().chain(row).copied().collect());
        }
    }
    if names.is_empty() {
        return Ok(None);
    }
    let models = ext_table
        .model_names
        .iter()
        .chain(&own.model_names)
        .cloned()
        .collect();
    AccuracyTable::new(values, models, names, Scale::Fraction).map(Some)
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let mut report = load_report(&a.input)?;
    if let Some(path) = &a.external {
        let (model_names, dataset_names, values) = csvio::read_table_cells(path)?;
        let scale = if a.percent {
            Scale::Percent
        } else {
            Scale::Fraction
        };
        // validates the values against the declared scale
        AccuracyTable::new(
            values.clone(),
            model_names.clone(),
            dataset_names.clone(),
            scale,
        )?;
        report.external = Some(ExternalColumns {
            source: path.to_string_lossy().into_owned(),
            scale,
            model_names,
            dataset_names,
            values,
        });
    }
    print!("{}", render_summary(&report));
    let own = report.accuracy_table()?;
    if own.n_datasets() >= 2 && own.n_models() >= 2 {
        println!();
        print!("{}", render_comparison(&compare(&own, a.qalpha)?));
    }
    if let Some(ext) = &report.external {
        if let Some(t) = combined_table(&report, ext)? {
            if t.n_datasets() >= 2 {
                println!(
                    "\nWith external columns ({} shared datasets):",
                    t.n_datasets()
                );
                print!("{}", render_comparison(&compare(&t, a.qalpha)?));
            }
        }
        if let Some(Ok(t)) = report.external_table() {
            if t.n_datasets() >= 2 && t.n_models() >= 2 {
                println!("\nExternal columns alone:");
                print!("{}", render_comparison(&compare(&t, a.qalpha)?));
            }
        }
    }
    if let Some(out) = &a.out {
        save_report(out, &report)?;
    }
    Ok(())
}
