//! Classification metrics.

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("no samples")]
    Empty,
    #[error("need at least 2 classes")]
    TooFewClasses,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Mean of per-class F1 scores.
    pub macro_f1: f64,
    /// Binary: ROC AUC of class 1. Multiclass: mean one-vs-rest AUC over
    /// classes present with both positives and negatives.
    pub auc: f64,
    pub per_class_precision: Vec<f64>,
    pub per_class_recall: Vec<f64>,
    pub per_class_f1: Vec<f64>,
}

pub fn confusion_matrix(truth: &[usize], pred: &[usize], classes: usize) -> Result<Vec<Vec<usize>>, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            what: "predictions",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    let mut m = vec![vec![0usize; classes]; classes];
    for (&t, &p) in truth.iter().zip(pred) {
        for label in [t, p] {
            if label >= classes {
                return Err(MetricsError::BadLabel { label, classes });
            }
        }
        m[t][p] += 1;
    }
    Ok(m)
}

/// Mann–Whitney AUC: probability that a random positive outscores a random
/// negative, ties counting one half. `None` without both kinds of sample.
pub fn auc_rank(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks, 1-based
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += order[i..=j].iter().filter(|&&k| positive[k]).count() as f64 * mid;
        i = j + 1;
    }
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos as f64 * n_neg as f64))
}

pub fn compute_metrics(truth: &[usize], pred: &[usize], scores: &[Vec<f64>], classes: usize) -> Result<EvalReport, MetricsError> {
    if classes < 2 {
        return Err(MetricsError::TooFewClasses);
    }
    if truth.is_empty() {
        return Err(MetricsError::Empty);
    }
    if scores.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            what: "scores",
            expected: truth.len(),
            got: scores.len(),
        });
    }
    if let Some(s) = scores.iter().find(|s| s.len() != classes) {
        return Err(MetricsError::LengthMismatch {
            what: "score vector",
            expected: classes,
            got: s.len(),
        });
    }
    let confusion = confusion_matrix(truth, pred, classes)?;
    let n = truth.len();
    let correct: usize = (0..classes).map(|c| confusion[c][c]).sum();

    let mut precision = vec![0.0; classes];
    let mut recall = vec![0.0; classes];
    let mut f1 = vec![0.0; classes];
    for c in 0..classes {
        let tp = confusion[c][c] as f64;
        let actual: usize = confusion[c].iter().sum();
        let predicted: usize = (0..classes).map(|r| confusion[r][c]).sum();
        if actual == 0 {
            warn!("class {c} absent from true labels; precision and recall set to 0");
            continue;
        }
        recall[c] = tp / actual as f64;
        precision[c] = if predicted == 0 { 0.0 } else { tp / predicted as f64 };
        if precision[c] + recall[c] > 0.0 {
            f1[c] = 2.0 * precision[c] * recall[c] / (precision[c] + recall[c]);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let class_auc = |c: usize| {
        let s: Vec<f64> = scores.iter().map(|row| row[c]).collect();
        let pos: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        auc_rank(&s, &pos)
    };
    let auc = if classes == 2 {
        class_auc(1).unwrap_or(0.5)
    } else {
        let aucs: Vec<f64> = (0..classes).filter_map(class_auc).collect();
        if aucs.is_empty() {
            0.5
        } else {
            mean(&aucs)
        }
    };

    Ok(EvalReport {
        confusion,
        accuracy: correct as f64 / n as f64,
        macro_precision: mean(&precision),
        macro_recall: mean(&recall),
        macro_f1: mean(&f1),
        auc,
        per_class_precision: precision,
        per_class_recall: recall,
        per_class_f1: f1,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    // shifted so that identical values give exactly that value
    let m = values[0] + values.iter().map(|v| v - values[0]).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(labels: &[usize], classes: usize) -> Vec<Vec<f64>> {
        labels
            .iter()
            .map(|&l| (0..classes).map(|c| if c == l { 1.0 } else { 0.0 }).collect())
            .collect()
    }

    #[test]
    fn perfect_predictions() {
        let y = vec![0, 1, 2, 1, 0, 2];
        let r = compute_metrics(&y, &y, &one_hot(&y, 3), 3).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.auc, 1.0);
    }

    #[test]
    fn hand_built_binary_confusion() {
        // [[50, 0], [10, 40]]
        let mut truth = vec![0; 50];
        truth.extend(vec![1; 50]);
        let mut pred = vec![0; 60];
        pred.extend(vec![1; 40]);
        let r = compute_metrics(&truth, &pred, &one_hot(&pred, 2), 2).unwrap();
        assert_eq!(r.confusion, vec![vec![50, 0], vec![10, 40]]);
        assert!((r.accuracy - 0.9).abs() < 1e-15);
        assert!((r.per_class_recall[1] - 0.8).abs() < 1e-15);
        assert!((r.per_class_precision[0] - 50.0 / 60.0).abs() < 1e-15);
        assert_eq!(r.per_class_precision[1], 1.0);
    }

    #[test]
    fn absent_class_scores_zero() {
        let truth = vec![0, 0, 1, 1];
        let pred = vec![0, 2, 1, 1];
        let r = compute_metrics(&truth, &pred, &one_hot(&pred, 3), 3).unwrap();
        assert_eq!(r.per_class_recall[2], 0.0);
        assert_eq!(r.per_class_precision[2], 0.0);
        assert_eq!(r.confusion.iter().flatten().sum::<usize>(), 4);
    }

    #[test]
    fn auc_with_ties() {
        assert_eq!(auc_rank(&[0.5, 0.5], &[true, false]), Some(0.5));
        assert_eq!(auc_rank(&[0.1, 0.9], &[false, true]), Some(1.0));
        assert_eq!(auc_rank(&[0.1, 0.9], &[true, false]), Some(0.0));
        assert_eq!(auc_rank(&[0.1, 0.9], &[true, true]), None);
        // pos {0.8, 0.4}, neg {0.4, 0.2}: pairs 1 + 1 + 0.5 + 1 = 3.5 of 4
        assert_eq!(auc_rank(&[0.8, 0.4, 0.4, 0.2], &[true, true, false, false]), Some(0.875));
    }

    #[test]
    fn errors() {
        assert!(matches!(compute_metrics(&[0], &[0, 1], &[vec![1.0, 0.0]], 2), Err(MetricsError::LengthMismatch { .. })));
        assert_eq!(compute_metrics(&[3], &[0], &[vec![1.0, 0.0]], 2), Err(MetricsError::BadLabel { label: 3, classes: 2 }));
        assert_eq!(compute_metrics(&[], &[], &[], 2), Err(MetricsError::Empty));
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        let v = 29.0 / 30.0;
        assert_eq!(mean_std(&[v; 5]), (v, 0.0));
    }
}
