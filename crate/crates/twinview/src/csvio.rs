//! CSV readers and writers for datasets, view bundles and accuracy tables.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! matrix written and read back is bit-identical.

use std::fs;
use std::io::Write;
use std::path::Path;

use twinview_core::data::{Dataset, Label, MultiviewDataset};
use twinview_core::stats::{AccuracyTable, Scale};
use twinview_core::{Error, Matrix};

use crate::error::{AppError, Result};

/// Which column of a dataset CSV holds the labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    /// Header name; the file must then have a header row.
    Named(String),
}

impl LabelColumn {
    pub fn from_option(name: Option<&str>) -> Self {
        match name {
            None | Some("last") => LabelColumn::Last,
            Some(n) => LabelColumn::Named(n.to_string()),
        }
    }
}

fn ingest(row: usize, message: impl Into<String>) -> AppError {
    AppError::Core(Error::Ingest {
        row: Some(row),
        message: message.into(),
    })
}

fn read_records(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| ingest(i + 1, e.to_string()))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        rows.push((line, rec.iter().map(|c| c.trim().to_string()).collect()));
    }
    Ok(rows)
}

fn is_numeric_row(cells: &[String]) -> bool {
    cells.iter().all(|c| c.parse::<f64>().is_ok())
}

fn parse_label(cell: &str, line: usize) -> Result<Label> {
    match cell.parse::<f64>() {
        Ok(1.0) => Ok(1),
        Ok(v) if v == -1.0 || v == 0.0 => Ok(-1),
        _ => Err(ingest(
            line,
            format!("label '{cell}' is not one of -1, 0, 1"),
        )),
    }
}

fn parse_cell(cell: &str, line: usize, col: usize) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(ingest(
            line,
            format!("column {}: non-finite value '{cell}'", col + 1),
        )),
        Err(_) => Err(ingest(
            line,
            format!("column {}: '{cell}' is not a number", col + 1),
        )),
    }
}

/// Loads a labelled dataset. A first row that is not entirely numeric is a
/// header. Labels may be `{-1, +1}` or `{0, 1}` with 0 read as -1. Row
/// numbers in errors are 1-based file lines.
pub fn load_csv(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    let rows = read_records(path)?;
    let Some((first_line, first)) = rows.first() else {
        return Err(ingest(1, "file has no rows"));
    };
    let has_header = !is_numeric_row(first);
    let width = first.len();
    let label_idx = match label {
        LabelColumn::Last => width - 1,
        LabelColumn::Named(name) => {
            if !has_header {
                return Err(ingest(
                    *first_line,
                    format!("label column '{name}' requested but the file has no header"),
                ));
            }
            first
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| ingest(*first_line, format!("no column named '{name}'")))?
        }
    };
    if width < 2 {
        return Err(ingest(
            *first_line,
            "need at least one feature column and a label column",
        ));
    }
    let body = if has_header { &rows[1..] } else { &rows[..] };
    let mut data = Vec::with_capacity(body.len() * (width - 1));
    let mut labels = Vec::with_capacity(body.len());
    for (line, cells) in body {
        if cells.len() != width {
            return Err(ingest(
                *line,
                format!("expected {width} fields, found {}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            if j == label_idx {
                labels.push(parse_label(cell, *line)?);
            } else {
                data.push(parse_cell(cell, *line, j)?);
            }
        }
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let features = Matrix::from_row_slice(labels.len(), width - 1, &data);
    Ok(Dataset::new(features, labels, name)?)
}

/// Reads a headerless numeric matrix.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let rows = read_records(path)?;
    let width = rows.first().map_or(0, |(_, c)| c.len());
    let mut data = Vec::with_capacity(rows.len() * width);
    for (line, cells) in &rows {
        if cells.len() != width {
            return Err(ingest(
                *line,
                format!("expected {width} fields, found {}", cells.len()),
            ));
        }
        for (j, c) in cells.iter().enumerate() {
            data.push(parse_cell(c, *line, j)?);
        }
    }
    Ok(Matrix::from_row_slice(rows.len(), width, &data))
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| AppError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create(path)?
        .write_all(text.as_bytes())
        .map_err(|e| AppError::io(path, e))
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    write_text(path, &matrix_to_csv(m))
}

pub fn write_labels(path: &Path, labels: &[Label]) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    write_text(path, &text)
}

pub fn read_labels(path: &Path) -> Result<Vec<Label>> {
    read_records(path)?
        .iter()
        .map(|(line, cells)| match cells.as_slice() {
            [c] => parse_label(c, *line),
            _ => Err(ingest(
                *line,
                format!("expected 1 field, found {}", cells.len()),
            )),
        })
        .collect()
}

/// `view_a.csv`, `view_b.csv`, ... for views 0, 1, ...
pub fn view_file_name(v: usize) -> String {
    let letter = (b'a' + (v % 26) as u8) as char;
    if v < 26 {
        format!("view_{letter}.csv")
    } else {
        format!("view_{letter}{}.csv", v / 26)
    }
}

pub const LABELS_FILE: &str = "labels.csv";

/// Writes one CSV per view plus `labels.csv` into `dir`, creating it.
pub fn write_bundle(dir: &Path, data: &MultiviewDataset) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    for (v, view) in data.views.iter().enumerate() {
        write_matrix(&dir.join(view_file_name(v)), view)?;
    }
    write_labels(&dir.join(LABELS_FILE), &data.labels)
}

/// Views of a bundle, read in order until the next view file is missing.
pub fn read_bundle_views(dir: &Path) -> Result<Vec<Matrix>> {
    let mut views = Vec::new();
    loop {
        let path = dir.join(view_file_name(views.len()));
        if !path.exists() {
            break;
        }
        views.push(read_matrix(&path)?);
    }
    if views.is_empty() {
        return Err(AppError::Core(Error::Ingest {
            row: None,
            message: format!("{}: no view_a.csv", dir.display()),
        }));
    }
    Ok(views)
}

/// Views plus labels. Bundles without `labels.csv` are rejected.
pub fn read_bundle(dir: &Path) -> Result<MultiviewDataset> {
    let views = read_bundle_views(dir)?;
    let labels = read_labels(&dir.join(LABELS_FILE))?;
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(MultiviewDataset::new(views, labels, name)?)
}

/// Datasets x models table with a header row `dataset,<model>,...`.
pub fn read_accuracy_table(path: &Path, scale: Scale) -> Result<AccuracyTable> {
    let (models, names, values) = read_table_cells(path)?;
    Ok(AccuracyTable::new(values, models, names, scale)?)
}

/// Raw contents of an accuracy-table CSV: model names, dataset names, values.
/// Model names, dataset names and the values of an accuracy CSV.
pub type TableCells = (Vec<String>, Vec<String>, Vec<Vec<f64>>);

pub fn read_table_cells(path: &Path) -> Result<TableCells> {
    let rows = read_records(path)?;
    let Some((first_line, header)) = rows.first() else {
        return Err(ingest(1, "table has no header row"));
    };
    if header.len() < 2 || is_numeric_row(&header[1..]) {
        return Err(ingest(
            *first_line,
            "expected a header row: dataset,<model>,...",
        ));
    }
    let models: Vec<String> = header[1..].to_vec();
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (line, cells) in &rows[1..] {
        if cells.len() != header.len() {
            return Err(ingest(
                *line,
                format!("expected {} fields, found {}", header.len(), cells.len()),
            ));
        }
        names.push(cells[0].clone());
        values.push(
            cells[1..]
                .iter()
                .enumerate()
                .map(|(j, c)| parse_cell(c, *line, j + 1))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((models, names, values))
}

pub fn table_to_csv(models: &[String], names: &[String], values: &[Vec<f64>]) -> String {
    let mut out = format!("dataset,{}\n", models.join(","));
    for (name, row) in names.iter().zip(values) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{name},{}\n", cells.join(",")));
    }
    out
}
