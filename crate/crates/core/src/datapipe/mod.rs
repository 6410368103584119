//! Dataset ingestion and preprocessing for the UCI benchmarks.

mod chi2;
mod load;
mod normalize;
mod split;

pub use chi2::{chi2_critical_value, chi2_survival, chi_square_select, chi_square_statistic, SelectionPolicy, SelectionResult};
pub use load::{load_dataset, read_csv, write_csv, DatasetKind};
pub use normalize::{min_max_normalize, MinMaxScaler};
pub use split::{stratified_split, SplitIndices};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("unknown dataset '{0}' (expected wdbc, iris or banknote)")]
    UnknownDataset(String),
    #[error("dataset is empty")]
    Empty,
    #[error("{0}")]
    Invalid(String),
    #[error("class '{class}' has {count} instance(s); stratified splitting needs at least 2")]
    ClassTooSmall { class: String, count: usize },
    #[error("test fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("bins must be at least 2, got {0}")]
    TooFewBins(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Feature matrix with integer class labels in `[0, class_names.len())`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self, DataError> {
        let d = Dataset {
            name: name.into(),
            features,
            labels,
            feature_names,
            class_names,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.features.len() != self.labels.len() {
            return Err(DataError::Invalid(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let width = self.feature_names.len();
        if let Some((i, row)) = self.features.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(DataError::Invalid(format!(
                "row {i} has {} features, expected {width}",
                row.len()
            )));
        }
        if let Some((i, v)) = self
            .features
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.iter().find(|v| !v.is_finite()).map(|v| (i, *v)))
        {
            return Err(DataError::Invalid(format!("row {i} contains non-finite value {v}")));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.class_names.len()) {
            return Err(DataError::Invalid(format!(
                "label {l} out of range for {} classes",
                self.class_names.len()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
        }
    }

    /// Keeps feature columns at `columns`, in that order.
    pub fn select_features(&self, columns: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self
                .features
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            class_names: self.class_names.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// True when both datasets have the same feature and class schema.
    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.feature_names == other.feature_names && self.class_names == other.class_names
    }
}
