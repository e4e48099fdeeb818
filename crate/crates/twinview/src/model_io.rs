//! JSON persistence for fitted models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use twinview_core::data::Label;
use twinview_core::kernel::KernelSpec;
use twinview_core::mvrkm::{MvrkmModel, MvrkmParams};
use twinview_core::tmvrkm::{ClassSplit, TmvrkmModel, TmvrkmParams, Variant};
use twinview_core::{Matrix, Vector};

use crate::error::{AppError, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Row-major rows of a matrix.
pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Inverse of [`matrix_rows`]; `cols` is needed when there are no rows.
pub fn rows_to_matrix(rows: &[Vec<f64>], cols: usize) -> std::result::Result<Matrix, String> {
    if let Some(r) = rows.iter().find(|r| r.len() != cols) {
        return Err(format!(
            "ragged matrix: row of length {} where {cols} expected",
            r.len()
        ));
    }
    Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmvrkmDocument {
    pub variant: Variant,
    pub kernel: KernelSpec,
    pub eta1: f64,
    pub eta2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub h1: Vec<f64>,
    pub b1: f64,
    pub h2: Vec<f64>,
    pub b2: f64,
    /// Feature count per view, so empty classes still carry their shape.
    pub view_dims: Vec<usize>,
    #[serde(rename = "A_views")]
    pub a_views: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B_views")]
    pub b_views: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvrkmDocument {
    pub kernel: KernelSpec,
    pub eta: f64,
    pub lambda: f64,
    pub z: Vec<f64>,
    pub b: f64,
    pub view_dims: Vec<usize>,
    pub views: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_type", rename_all = "lowercase")]
pub enum ModelBody {
    Tmvrkm(TmvrkmDocument),
    Mvrkm(MvrkmDocument),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub body: ModelBody,
}

/// A fitted model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tmvrkm(TmvrkmModel),
    Mvrkm(MvrkmModel),
}

impl FittedModel {
    pub fn predict(&self, views: &[Matrix]) -> twinview_core::Result<Vec<Label>> {
        match self {
            FittedModel::Tmvrkm(m) => m.predict(views),
            FittedModel::Mvrkm(m) => m.predict(views),
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        let body = match self {
            FittedModel::Tmvrkm(m) => ModelBody::Tmvrkm(TmvrkmDocument {
                variant: m.params.variant,
                kernel: m.params.kernel,
                eta1: m.params.eta1,
                eta2: m.params.eta2,
                lambda1: m.params.lambda1,
                lambda2: m.params.lambda2,
                h1: m.h1.iter().copied().collect(),
                b1: m.b1,
                h2: m.h2.iter().copied().collect(),
                b2: m.b2,
                view_dims: m.split.view_dims(),
                a_views: m.split.positive.iter().map(matrix_rows).collect(),
                b_views: m.split.negative.iter().map(matrix_rows).collect(),
            }),
            FittedModel::Mvrkm(m) => ModelBody::Mvrkm(MvrkmDocument {
                kernel: m.params.kernel,
                eta: m.params.eta,
                lambda: m.params.lambda,
                z: m.z.iter().copied().collect(),
                b: m.b,
                view_dims: m.train_views.iter().map(|v| v.ncols()).collect(),
                views: m.train_views.iter().map(matrix_rows).collect(),
                labels: m.labels.clone(),
            }),
        };
        ModelDocument {
            schema_version: MODEL_SCHEMA_VERSION,
            body,
        }
    }

    pub fn from_document(doc: ModelDocument) -> std::result::Result<Self, String> {
        if doc.schema_version != MODEL_SCHEMA_VERSION {
            return Err(format!(
                "schema_version {} (expected {MODEL_SCHEMA_VERSION})",
                doc.schema_version
            ));
        }
        let views =
            |rows: &[Vec<Vec<f64>>], dims: &[usize]| -> std::result::Result<Vec<Matrix>, String> {
                if rows.len() != dims.len() {
                    return Err(format!("{} views but {} view_dims", rows.len(), dims.len()));
                }
                rows.iter()
                    .zip(dims)
                    .map(|(r, &d)| rows_to_matrix(r, d))
                    .collect()
            };
        match doc.body {
            ModelBody::Tmvrkm(d) => {
                let params = TmvrkmParams {
                    eta1: d.eta1,
                    eta2: d.eta2,
                    lambda1: d.lambda1,
                    lambda2: d.lambda2,
                    kernel: d.kernel,
                    variant: d.variant,
                };
                let split = ClassSplit::new(
                    views(&d.a_views, &d.view_dims)?,
                    views(&d.b_views, &d.view_dims)?,
                )
                .map_err(|e| e.to_string())?;
                TmvrkmModel::from_parts(
                    Vector::from_vec(d.h1),
                    d.b1,
                    Vector::from_vec(d.h2),
                    d.b2,
                    split,
                    params,
                )
                .map(FittedModel::Tmvrkm)
                .map_err(|e| e.to_string())
            }
            ModelBody::Mvrkm(d) => {
                let params = MvrkmParams::new(d.eta, d.lambda, d.kernel);
                MvrkmModel::from_parts(
                    Vector::from_vec(d.z),
                    d.b,
                    views(&d.views, &d.view_dims)?,
                    d.labels,
                    params,
                )
                .map(FittedModel::Mvrkm)
                .map_err(|e| e.to_string())
            }
        }
    }
}

pub fn save_model(path: &Path, model: &FittedModel) -> Result<()> {
    let mut text = serde_json::to_string_pretty(&model.to_document())
        .expect("model documents hold only finite numbers");
    text.push('\n');
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<FittedModel> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let bad = |message: String| AppError::ModelFormat {
        path: path.to_path_buf(),
        message,
    };
    let doc: ModelDocument = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    FittedModel::from_document(doc).map_err(bad)
}
