use log::warn;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// Per-feature min-max transform fitted on a subset of rows.
///
/// Columns that are constant on the fit rows are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    /// Original column indices that survive, ascending.
    pub kept: Vec<usize>,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub dropped: Vec<usize>,
}

impl MinMaxScaler {
    pub fn fit(dataset: &Dataset, fit_rows: &[usize]) -> Result<Self, DataError> {
        if fit_rows.is_empty() {
            return Err(DataError::Empty);
        }
        let mut kept = Vec::new();
        let mut mins = Vec::new();
        let mut maxs = Vec::new();
        let mut dropped = Vec::new();
        for c in 0..dataset.num_features() {
            let (lo, hi) = fit_rows
                .iter()
                .map(|&r| dataset.features[r][c])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if hi > lo {
                kept.push(c);
                mins.push(lo);
                maxs.push(hi);
            } else {
                warn!(
                    "{}: feature '{}' is constant on the fit rows; dropped",
                    dataset.name, dataset.feature_names[c]
                );
                dropped.push(c);
            }
        }
        Ok(Self {
            kept,
            mins,
            maxs,
            dropped,
        })
    }

    /// Maps kept columns to `[0, 1]`; values outside the fitted range are clamped.
    pub fn transform(&self, dataset: &Dataset) -> Dataset {
        let mut out = dataset.select_features(&self.kept);
        for row in &mut out.features {
            for (j, v) in row.iter_mut().enumerate() {
                *v = ((*v - self.mins[j]) / (self.maxs[j] - self.mins[j])).clamp(0.0, 1.0);
            }
        }
        out
    }

    /// Inverse of [`MinMaxScaler::transform`] for unclamped values.
    pub fn inverse(&self, normalized: &[f64]) -> Vec<f64> {
        normalized
            .iter()
            .enumerate()
            .map(|(j, v)| self.mins[j] + v * (self.maxs[j] - self.mins[j]))
            .collect()
    }
}

/// Fits on `fit_rows` and transforms the whole dataset.
pub fn min_max_normalize(dataset: &Dataset, fit_rows: &[usize]) -> Result<(Dataset, MinMaxScaler), DataError> {
    let scaler = MinMaxScaler::fit(dataset, fit_rows)?;
    Ok((scaler.transform(dataset), scaler))
}
