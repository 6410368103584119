use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset};

/// Row indices of a train/test partition, each list ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class proportional split. Each class contributes
/// `round(count * test_fraction)` rows to the test side, clamped so both
/// sides keep at least one row of every class.
pub fn stratified_split(dataset: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset, SplitIndices), DataError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(DataError::BadFraction(test_fraction));
    }
    if dataset.is_empty() {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in 0..dataset.num_classes() {
        let mut rows: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.labels[i] == class).collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(DataError::ClassTooSmall {
                class: dataset.class_names[class].clone(),
                count: rows.len(),
            });
        }
        rows.shuffle(&mut rng);
        let n_test = ((rows.len() as f64 * test_fraction).round() as usize).clamp(1, rows.len() - 1);
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let split = SplitIndices { train, test };
    Ok((dataset.subset(&split.train), dataset.subset(&split.test), split))
}
