//! Rank-based comparison of several models over several datasets:
//! average ranks, the Friedman chi-square and F statistics, and the Nemenyi
//! critical difference.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default studentized-range constant for six models at the 5% level.
pub const DEFAULT_Q_ALPHA: f64 = 2.850;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Fraction,
    Percent,
}

/// Accuracies of `l` models (columns) on `K` datasets (rows), stored as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub values: Vec<Vec<f64>>,
    pub model_names: Vec<String>,
    pub dataset_names: Vec<String>,
}

impl AccuracyTable {
    pub fn new(
        values: Vec<Vec<f64>>,
        model_names: Vec<String>,
        dataset_names: Vec<String>,
        scale: Scale,
    ) -> Result<Self> {
        if values.len() != dataset_names.len() {
            return Err(Error::Stats(format!(
                "{} rows but {} dataset names",
                values.len(),
                dataset_names.len()
            )));
        }
        let (divisor, upper) = match scale {
            Scale::Fraction => (1.0, 1.0),
            Scale::Percent => (100.0, 100.0),
        };
        let mut converted = Vec::with_capacity(values.len());
        for (row, name) in values.iter().zip(&dataset_names) {
            if row.len() != model_names.len() {
                return Err(Error::Stats(format!(
                    "dataset '{name}' has {} cells, expected {}",
                    row.len(),
                    model_names.len()
                )));
            }
            if let Some(v) = row
                .iter()
                .find(|v| !(v.is_finite() && **v >= 0.0 && **v <= upper))
            {
                return Err(Error::Stats(format!(
                    "dataset '{name}': accuracy {v} is absent or outside [0, {upper}]"
                )));
            }
            converted.push(row.iter().map(|v| v / divisor).collect());
        }
        Ok(AccuracyTable {
            values: converted,
            model_names,
            dataset_names,
        })
    }

    pub fn n_datasets(&self) -> usize {
        self.values.len()
    }

    pub fn n_models(&self) -> usize {
        self.model_names.len()
    }

    /// Column means.
    pub fn mean_accuracy(&self) -> Vec<f64> {
        let k = self.n_datasets() as f64;
        (0..self.n_models())
            .map(|j| self.values.iter().map(|r| r[j]).sum::<f64>() / k)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub rank_matrix: Vec<Vec<f64>>,
    pub avg_ranks: Vec<f64>,
    pub k: usize,
    pub l: usize,
}

/// Ranks within one row: 1 for the highest value, ties share the mean of
/// the positions they occupy.
pub fn rank_row(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; row.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && row[order[end]] == row[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let shared = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = shared;
        }
        start = end;
    }
    ranks
}

pub fn rank_models(table: &AccuracyTable) -> Result<RankSummary> {
    let (k, l) = (table.n_datasets(), table.n_models());
    if k < 2 || l < 2 {
        return Err(Error::Stats(format!(
            "need at least 2 datasets and 2 models, got K = {k}, l = {l}"
        )));
    }
    if let Some((i, _)) = table
        .values
        .iter()
        .enumerate()
        .find(|(_, r)| r.len() != l || r.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::Stats(format!(
            "dataset '{}' has absent cells",
            table.dataset_names[i]
        )));
    }
    let rank_matrix: Vec<Vec<f64>> = table.values.iter().map(|r| rank_row(r)).collect();
    let avg_ranks = (0..l)
        .map(|j| rank_matrix.iter().map(|r| r[j]).sum::<f64>() / k as f64)
        .collect();
    Ok(RankSummary {
        rank_matrix,
        avg_ranks,
        k,
        l,
    })
}

/// `12K / (l(l+1)) * (sum_j R_j^2 - l(l+1)^2 / 4)` for average ranks `R` over `K` datasets.
pub fn friedman_chi2(avg_ranks: &[f64], k: usize) -> f64 {
    let l = avg_ranks.len() as f64;
    let k = k as f64;
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    12.0 * k / (l * (l + 1.0)) * (sum_sq - l * (l + 1.0) * (l + 1.0) / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanF {
    pub value: f64,
    pub df1: usize,
    pub df2: usize,
}

/// `(K-1) chi2 / (K(l-1) - chi2)` with `(l-1, (K-1)(l-1))` degrees of freedom.
pub fn friedman_f(chi2: f64, k: usize, l: usize) -> Result<FriedmanF> {
    if k < 2 || l < 2 {
        return Err(Error::Stats(format!(
            "need K >= 2 and l >= 2, got K = {k}, l = {l}"
        )));
    }
    let denom = (k * (l - 1)) as f64 - chi2;
    if !(denom > 0.0) {
        return Err(Error::Stats(format!(
            "F statistic undefined: chi2 = {chi2} reaches its maximum K(l-1) = {}",
            k * (l - 1)
        )));
    }
    Ok(FriedmanF {
        value: (k - 1) as f64 * chi2 / denom,
        df1: l - 1,
        df2: (k - 1) * (l - 1),
    })
}

/// `q_alpha * sqrt(l(l+1) / (6K))`.
pub fn nemenyi_cd(q_alpha: f64, l: usize, k: usize) -> f64 {
    let (l, k) = (l as f64, k as f64);
    q_alpha * libm::sqrt(l * (l + 1.0) / (6.0 * k))
}

/// Critical difference printed alongside the six-model, 27-dataset comparison in
/// the published results for `q_alpha = 2.850`; the formula gives about 1.4513.
pub const PUBLISHED_CD_SIX_BY_27: f64 = 1.4788;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model_names: Vec<String>,
    pub ranks: RankSummary,
    pub chi2: f64,
    pub chi2_df: usize,
    /// Absent when chi2 reaches `K(l-1)` and the F statistic is undefined.
    pub friedman_f: Option<FriedmanF>,
    pub q_alpha: f64,
    pub cd: f64,
    /// `|R_i - R_j|`
    pub rank_gaps: Vec<Vec<f64>>,
    pub significant: Vec<Vec<bool>>,
    pub notes: Vec<String>,
}

impl ComparisonReport {
    /// `R_j - R_reference` for every model `j`.
    pub fn gaps_from(&self, reference: usize) -> Vec<f64> {
        self.ranks
            .avg_ranks
            .iter()
            .map(|r| r - self.ranks.avg_ranks[reference])
            .collect()
    }
}

pub fn compare(table: &AccuracyTable, q_alpha: f64) -> Result<ComparisonReport> {
    if !(q_alpha >= 0.0 && q_alpha.is_finite()) {
        return Err(Error::Stats(format!(
            "q_alpha must be nonnegative, got {q_alpha}"
        )));
    }
    let ranks = rank_models(table)?;
    let (k, l) = (ranks.k, ranks.l);
    let chi2 = friedman_chi2(&ranks.avg_ranks, k);
    let mut notes = Vec::new();
    let friedman_f = match friedman_f(chi2, k, l) {
        Ok(f) => Some(f),
        Err(e) => {
            notes.push(format!("{e}"));
            None
        }
    };
    let cd = nemenyi_cd(q_alpha, l, k);
    if l == 6 && k == 27 {
        notes.push(format!(
            "C.D. for l = 6, K = 27 is {cd:.4} from q_alpha * sqrt(l(l+1)/(6K)); published comparisons of this shape print {PUBLISHED_CD_SIX_BY_27} for q_alpha = 2.850"
        ));
    }
    let r = &ranks.avg_ranks;
    let rank_gaps: Vec<Vec<f64>> = (0..l)
        .map(|i| (0..l).map(|j| (r[i] - r[j]).abs()).collect())
        .collect();
    let significant = rank_gaps
        .iter()
        .map(|row| row.iter().map(|&g| g > cd).collect())
        .collect();
    Ok(ComparisonReport {
        model_names: table.model_names.clone(),
        ranks,
        chi2,
        chi2_df: l - 1,
        friedman_f,
        q_alpha,
        cd,
        rank_gaps,
        significant,
        notes,
    })
}
