use std::fmt;
use std::str::FromStr;

use log::info;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// Which features survive selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionPolicy {
    /// Keep features with p-value below alpha.
    Alpha(f64),
    /// Keep the k highest-scoring features.
    TopK(usize),
}

impl fmt::Display for SelectionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectionPolicy::Alpha(a) => write!(f, "alpha={a}"),
            SelectionPolicy::TopK(k) => write!(f, "topk={k}"),
        }
    }
}

impl FromStr for SelectionPolicy {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DataError::Invalid(format!("policy must be alpha=F or topk=K, got '{s}'"));
        let (key, value) = s.split_once('=').ok_or_else(bad)?;
        match key.trim() {
            "alpha" => value.trim().parse().map(SelectionPolicy::Alpha).map_err(|_| bad()),
            "topk" => value.trim().parse().map(SelectionPolicy::TopK).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Surviving feature indices, highest χ² first.
    pub kept_indices: Vec<usize>,
    /// Per feature, in original column order.
    pub chi2_scores: Vec<f64>,
    pub p_values: Vec<f64>,
    pub degrees_of_freedom: Vec<usize>,
    /// Empty bins merged away per feature.
    pub merged_bins: Vec<usize>,
}

/// Pearson χ² of a contingency table, `E = row_total * col_total / grand_total`.
/// All-zero rows and columns are ignored.
pub fn chi_square_statistic(table: &[Vec<f64>]) -> f64 {
    let (rows, cols) = nonzero_margins(table);
    let grand: f64 = rows.iter().map(|(_, t)| t).sum();
    let mut chi2 = 0.0;
    for &(r, rt) in &rows {
        for &(c, ct) in &cols {
            let expected = rt * ct / grand;
            let diff = table[r][c] - expected;
            chi2 += diff * diff / expected;
        }
    }
    chi2
}

fn nonzero_margins(table: &[Vec<f64>]) -> (Vec<(usize, f64)>, Vec<(usize, f64)>) {
    let width = table.first().map_or(0, Vec::len);
    let rows = table
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r.iter().sum::<f64>()))
        .filter(|&(_, t)| t > 0.0)
        .collect();
    let cols = (0..width)
        .map(|c| (c, table.iter().map(|r| r[c]).sum::<f64>()))
        .filter(|&(_, t)| t > 0.0)
        .collect();
    (rows, cols)
}

fn contingency_table(values: impl Iterator<Item = f64> + Clone, labels: &[usize], bins: usize, classes: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = values
        .clone()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let width = hi - lo;
    let mut table = vec![vec![0.0; classes]; bins];
    for (v, &label) in values.zip(labels) {
        let bin = if width > 0.0 {
            (((v - lo) / width * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        table[bin][label] += 1.0;
    }
    table
}

/// Scores each feature with χ² against the labels after equal-width
/// discretization into `bins` bins, then applies `policy`.
///
/// Empty bins would have zero expected counts; they are merged into their
/// neighbours (equivalently dropped) and the degrees of freedom shrink.
pub fn chi_square_select(dataset: &Dataset, bins: usize, policy: SelectionPolicy) -> Result<SelectionResult, DataError> {
    if bins < 2 {
        return Err(DataError::TooFewBins(bins));
    }
    if dataset.is_empty() {
        return Err(DataError::Empty);
    }
    let classes = dataset.num_classes();
    let mut chi2_scores = Vec::new();
    let mut p_values = Vec::new();
    let mut degrees_of_freedom = Vec::new();
    let mut merged_bins = Vec::new();
    for f in 0..dataset.num_features() {
        let table = contingency_table(dataset.features.iter().map(|r| r[f]), &dataset.labels, bins, classes);
        let (rows, cols) = nonzero_margins(&table);
        let merged = bins - rows.len();
        if merged > 0 {
            info!(
                "{}: feature '{}' has {merged} empty bin(s); merged",
                dataset.name, dataset.feature_names[f]
            );
        }
        let df = rows.len().saturating_sub(1) * cols.len().saturating_sub(1);
        let chi2 = chi_square_statistic(&table);
        let p = if df == 0 { 1.0 } else { chi2_survival(chi2, df as f64) };
        chi2_scores.push(chi2);
        p_values.push(p);
        degrees_of_freedom.push(df);
        merged_bins.push(merged);
    }

    let mut order: Vec<usize> = (0..dataset.num_features()).collect();
    order.sort_by(|&a, &b| chi2_scores[b].total_cmp(&chi2_scores[a]).then(a.cmp(&b)));
    let kept_indices = match policy {
        SelectionPolicy::TopK(k) => order.into_iter().take(k).collect(),
        SelectionPolicy::Alpha(alpha) => order.into_iter().filter(|&f| p_values[f] < alpha).collect(),
    };
    Ok(SelectionResult {
        kept_indices,
        chi2_scores,
        p_values,
        degrees_of_freedom,
        merged_bins,
    })
}

/// `P(X > x)` for `X ~ χ²(df)`, i.e. the regularized upper incomplete gamma `Q(df/2, x/2)`.
pub fn chi2_survival(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Critical value `c` with `P(X > c) = alpha`, by bisection on [`chi2_survival`].
pub fn chi2_critical_value(alpha: f64, df: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, df.max(1.0));
    while chi2_survival(hi, df) > alpha {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_survival(mid, df) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

// Lanczos approximation (g = 7, n = 9).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum.ln() - x + a * x.ln() - ln_gamma(a)).exp()
}

// Modified Lentz evaluation.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (a * x.ln() - x - ln_gamma(a)).exp() * h
}
