//! Sweep grid CSV: header row of sigma values, first column of eta values,
//! `NA` for cells whose fit failed.

use std::fs;
use std::path::Path;

use twinview_core::eval::SweepGrid;
use twinview_core::Error;

use crate::error::{AppError, Result};

pub const CORNER: &str = "eta\\sigma";
pub const MISSING: &str = "NA";

pub fn sweep_to_csv(grid: &SweepGrid) -> String {
    let mut out = String::from(CORNER);
    for s in &grid.sigmas {
        out.push_str(&format!(",{s}"));
    }
    out.push('\n');
    for (eta, row) in grid.etas.iter().zip(&grid.accuracy) {
        out.push_str(&eta.to_string());
        for cell in row {
            match cell {
                Some(a) => out.push_str(&format!(",{a}")),
                None => out.push_str(&format!(",{MISSING}")),
            }
        }
        out.push('\n');
    }
    out
}

fn bad(line: usize, message: String) -> AppError {
    AppError::Core(Error::Ingest {
        row: Some(line),
        message,
    })
}

pub fn parse_sweep_csv(text: &str) -> Result<SweepGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| bad(1, "empty sweep file".into()))?;
    let num = |s: &str, line: usize| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(line, format!("'{s}' is not a number")))
    };
    let sigmas = header
        .split(',')
        .skip(1)
        .map(|s| num(s, 1))
        .collect::<Result<Vec<_>>>()?;
    let mut etas = Vec::new();
    let mut accuracy = Vec::new();
    for (i, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != sigmas.len() + 1 {
            return Err(bad(
                i + 1,
                format!(
                    "expected {} fields, found {}",
                    sigmas.len() + 1,
                    cells.len()
                ),
            ));
        }
        etas.push(num(cells[0], i + 1)?);
        accuracy.push(
            cells[1..]
                .iter()
                .map(|c| {
                    if c.trim() == MISSING {
                        Ok(None)
                    } else {
                        num(c, i + 1).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(SweepGrid {
        etas,
        sigmas,
        accuracy,
    })
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepGrid> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    parse_sweep_csv(&text)
}
