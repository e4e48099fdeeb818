//! Benchmark report: JSON persistence, external columns and the
//! accuracy table used for ranking.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twinview_core::eval::{GridSpec, ModelParams};
use twinview_core::stats::{AccuracyTable, Scale};
use twinview_core::tmvrkm::Variant;

use crate::error::{AppError, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
    /// The dataset failed before this model could run.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCell {
    pub model: String,
    pub status: CellStatus,
    pub test_accuracy: Option<f64>,
    pub cv_accuracy: Option<f64>,
    pub params: Option<ModelParams>,
    pub configs_evaluated: Option<usize>,
    pub skipped_folds: Option<usize>,
    /// Wall time of tuning, refit and prediction; only when timings are on.
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

impl ModelCell {
    pub fn absent(model: &str) -> Self {
        ModelCell {
            model: model.to_string(),
            status: CellStatus::Absent,
            test_accuracy: None,
            cv_accuracy: None,
            params: None,
            configs_evaluated: None,
            skipped_folds: None,
            seconds: None,
            error: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub name: String,
    pub path: String,
    pub n_samples: Option<usize>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub view_dims: Option<Vec<usize>>,
    pub pca_rank: Option<usize>,
    /// Set when ingestion or preparation failed.
    pub error: Option<String>,
    pub cells: Vec<ModelCell>,
}

impl DatasetResult {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.cells.iter().all(|c| c.status != CellStatus::Ok)
    }
}

/// Accuracy columns of models run elsewhere, kept exactly as read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalColumns {
    pub source: String,
    pub scale: Scale,
    pub model_names: Vec<String>,
    pub dataset_names: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub seed: u64,
    pub variant: Variant,
    pub folds: usize,
    pub pca_threshold: f64,
    pub grids: GridSpec,
    pub models: Vec<String>,
    pub datasets: Vec<DatasetResult>,
    #[serde(default)]
    pub external: Option<ExternalColumns>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite");
        s.push('\n');
        s
    }

    /// Datasets x models table of the benchmarked models over the datasets
    /// where every model succeeded, as fractions.
    pub fn accuracy_table(&self) -> twinview_core::Result<AccuracyTable> {
        let mut values = Vec::new();
        let mut names = Vec::new();
        for d in &self.datasets {
            let row: Option<Vec<f64>> = d
                .cells
                .iter()
                .map(|c| c.test_accuracy.filter(|_| c.status == CellStatus::Ok))
                .collect();
            if let (None, Some(row)) = (&d.error, row) {
                names.push(d.name.clone());
                values.push(row);
            }
        }
        AccuracyTable::new(values, self.models.clone(), names, Scale::Fraction)
    }

    /// The imported columns as a table, when present.
    pub fn external_table(&self) -> Option<twinview_core::Result<AccuracyTable>> {
        self.external.as_ref().map(|e| {
            AccuracyTable::new(
                e.values.clone(),
                e.model_names.clone(),
                e.dataset_names.clone(),
                e.scale,
            )
        })
    }
}

pub fn save_report(path: &Path, report: &BenchmarkReport) -> Result<()> {
    fs::write(path, report.to_json()).map_err(|e| AppError::io(path, e))
}

pub fn load_report(path: &Path) -> Result<BenchmarkReport> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_report(&text).map_err(|message| AppError::ReportFormat {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_report(text: &str) -> std::result::Result<BenchmarkReport, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(REPORT_SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(format!(
                "schema_version {v} (expected {REPORT_SCHEMA_VERSION})"
            ))
        }
        None => return Err("missing schema_version".to_string()),
    }
    serde_json::from_value(value).map_err(|e| e.to_string())
}
