//! Brute-force Euclidean KNN baseline.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datapipe::Dataset;
use crate::qknn::Prediction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CknnError {
    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("model has no training rows")]
    EmptyModel,
    #[error("k = {k} must lie in 1..={n_train}")]
    InvalidK { k: usize, n_train: usize },
    #[error("train and test schemas differ")]
    SchemaMismatch,
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64, CknnError> {
    if a.len() != b.len() {
        return Err(CknnError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CknnModel {
    pub train_features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub k: usize,
}

impl CknnModel {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self, CknnError> {
        if train.is_empty() {
            return Err(CknnError::EmptyModel);
        }
        if k == 0 || k > train.len() {
            return Err(CknnError::InvalidK {
                k,
                n_train: train.len(),
            });
        }
        Ok(Self {
            train_features: train.features.clone(),
            labels: train.labels.clone(),
            num_classes: train.num_classes(),
            k,
        })
    }

    /// Indices and distances of the `k` nearest rows; ties go to the lower index.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<(usize, f64)>, CknnError> {
        let mut dists = self
            .train_features
            .iter()
            .enumerate()
            .map(|(i, row)| euclidean_distance(row, x).map(|d| (i, d)))
            .collect::<Result<Vec<_>, _>>()?;
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        dists.truncate(self.k);
        Ok(dists)
    }

    /// Majority vote; ties prefer the smaller summed distance, then the lower
    /// class index. Scores are vote shares.
    pub fn classify(&self, x: &[f64]) -> Result<Prediction, CknnError> {
        if self.labels.is_empty() {
            return Err(CknnError::EmptyModel);
        }
        let neighbors = self.neighbors(x)?;
        let mut counts = vec![0usize; self.num_classes];
        let mut dist_sum = vec![0.0f64; self.num_classes];
        for &(i, d) in &neighbors {
            counts[self.labels[i]] += 1;
            dist_sum[self.labels[i]] += d;
        }
        let label = (0..self.num_classes)
            .max_by(|&a, &b| {
                counts[a]
                    .cmp(&counts[b])
                    .then(dist_sum[b].total_cmp(&dist_sum[a]))
                    .then(b.cmp(&a))
            })
            .unwrap_or(0);
        let n = neighbors.len() as f64;
        Ok(Prediction {
            label,
            scores: counts.iter().map(|&c| c as f64 / n).collect(),
        })
    }
}

pub fn fit_predict(train: &Dataset, test: &Dataset, k: usize) -> Result<Vec<Prediction>, CknnError> {
    if !train.same_schema(test) {
        return Err(CknnError::SchemaMismatch);
    }
    let model = CknnModel::fit(train, k)?;
    test.features.par_iter().map(|x| model.classify(x)).collect()
}
