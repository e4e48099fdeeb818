use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use twinview_core::eval::{GridSpec, ModelKind};
use twinview_core::tmvrkm::Variant;

use crate::error::{AppError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub name: Option<String>,
    /// Header name of the label column; the last column otherwise.
    pub label_col: Option<String>,
    /// Column widths of the views already present in the file. Without it,
    /// the second view is the PCA projection of the features.
    pub native_views: Option<Vec<usize>>,
}

fn default_folds() -> usize {
    5
}

fn default_threshold() -> f64 {
    0.95
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub datasets: Vec<DatasetSpec>,
    pub models: Vec<String>,
    pub seed: u64,
    #[serde(default)]
    pub grids: GridSpec,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_threshold")]
    pub pca_threshold: f64,
    #[serde(default)]
    pub stratified: bool,
    /// Wall times make reports differ between runs, so they are opt-in.
    #[serde(default)]
    pub record_timings: bool,
}

impl BenchmarkConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        let cfg: BenchmarkConfig = serde_json::from_str(&text)
            .map_err(|e| AppError::usage(format!("{}: {e}", path.display())))?;
        cfg.model_kinds()?;
        cfg.grids
            .validate()
            .map_err(|e| AppError::usage(e.to_string()))?;
        if cfg.folds < 2 {
            return Err(AppError::usage(format!(
                "folds must be at least 2, got {}",
                cfg.folds
            )));
        }
        if !(cfg.pca_threshold > 0.0 && cfg.pca_threshold <= 1.0) {
            return Err(AppError::usage(format!(
                "pca_threshold must lie in (0, 1], got {}",
                cfg.pca_threshold
            )));
        }
        Ok(cfg)
    }

    pub fn model_kinds(&self) -> Result<Vec<ModelKind>> {
        self.models
            .iter()
            .map(|m| {
                ModelKind::parse(m).ok_or_else(|| {
                    AppError::usage(format!("unknown model '{m}' (expected tmvrkm or mvrkm)"))
                })
            })
            .collect()
    }
}

impl DatasetSpec {
    pub fn resolved_path(&self, base: &Path) -> PathBuf {
        if self.path.is_absolute() {
            self.path.clone()
        } else {
            base.join(&self.path)
        }
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }
}
