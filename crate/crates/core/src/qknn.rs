//! Quantum k-nearest-neighbours classifier.
//!
//! Points are phase-encoded ([`encode_point`]), optionally passed through the
//! shared entangling feature map, and compared with the swap-test statistic
//! `D = ½(1 + |<a|b>|²)`, the probability that the swap-test ancilla reads 0.
//!
//! `D` grows with similarity, so neighbours are the training points with the
//! *largest* `D` (equivalently the largest fidelity). Ties go to the lower
//! training index.
//!
//! Because the feature map is one unitary applied to every point, it leaves
//! all pairwise fidelities unchanged; in exact mode predictions with and
//! without it coincide.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datapipe::Dataset;
use crate::encoding::{apply_feature_map, encode_point, feature_map_gates, EncodedPoint, EncodingConfig, EncodingError};
use crate::noise::{apply_noise_logged, NoiseError, NoiseSpec};
use crate::qec::{residual_logical_error, RepetitionCode};
use crate::qsim::{Gate, SimError, StateVector};
use crate::seeding::{derive_seed, stream_rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QknnError {
    #[error("k = {k} must lie in 1..={n_train}")]
    InvalidK { k: usize, n_train: usize },
    #[error("training set is empty")]
    EmptyTrain,
    #[error("train and test schemas differ")]
    SchemaMismatch,
    #[error("states have {left} and {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("sampled distance needs at least one shot")]
    ZeroShots,
    #[error("repetition count must be odd and positive, got {0}")]
    BadRepetitions(usize),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// How the swap-test statistic is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// `½(1 + |<a|b>|²)` from amplitudes.
    #[default]
    Exact,
    /// Simulate the ancilla swap-test circuit and estimate `P(ancilla = 0)`
    /// from this many shots.
    Sampled { shots: usize },
}

impl fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceMode::Exact => f.write_str("exact"),
            DistanceMode::Sampled { shots } => write!(f, "sampled({shots})"),
        }
    }
}

/// Where the noise channel is applied to each encoded register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Injection {
    AfterEncoding,
    #[default]
    AfterFeatureMap,
    Both,
}

impl FromStr for Injection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "after-encoding" => Ok(Injection::AfterEncoding),
            "after-feature-map" => Ok(Injection::AfterFeatureMap),
            "both" => Ok(Injection::Both),
            _ => Err(format!("unknown injection point '{s}'")),
        }
    }
}

/// Repetition-code based error mitigation for noisy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "n")]
pub enum Mitigation {
    #[default]
    None,
    /// Each noisy swap test is run `n` times on independent trajectories.
    /// Sampled mode majority-votes the `n` ancilla bits of every shot;
    /// exact mode takes the median of the `n` statistics.
    RepeatVote(usize),
    /// Every data qubit lives in an `n`-qubit bit-flip repetition block. The
    /// channel hits each physical qubit, the block is syndrome-corrected, and
    /// only the residual logical Pauli reaches the data qubit.
    PhysicalCode(usize),
}

impl fmt::Display for Mitigation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mitigation::None => f.write_str("none"),
            Mitigation::RepeatVote(_) => f.write_str("repeat-vote"),
            Mitigation::PhysicalCode(_) => f.write_str("physical-code"),
        }
    }
}

impl FromStr for Mitigation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Mitigation::None),
            "repeat-vote" => Ok(Mitigation::RepeatVote(3)),
            "physical-code" => Ok(Mitigation::PhysicalCode(3)),
            _ => Err(format!("unknown mitigation '{s}' (none, repeat-vote, physical-code)")),
        }
    }
}

/// Noise applied while classifying. Every swap-test evaluation re-prepares
/// both registers, so each (test, train) pair gets a fresh trajectory drawn
/// from a stream derived from `(seed, test row, train index)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub spec: NoiseSpec,
    pub injection: Injection,
    pub mitigation: Mitigation,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QknnConfig {
    pub k: usize,
    pub encoding: EncodingConfig,
    pub use_feature_map: bool,
    pub distance: DistanceMode,
    /// Seed for shot sampling in [`DistanceMode::Sampled`].
    pub seed: u64,
}

impl Default for QknnConfig {
    fn default() -> Self {
        Self {
            k: 3,
            encoding: EncodingConfig::default(),
            use_feature_map: true,
            distance: DistanceMode::Exact,
            seed: 0,
        }
    }
}

/// The `k` best training points for one test point, most similar first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborSet {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
    pub fidelities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    /// Fidelity-weighted vote share per class; sums to 1.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QknnModel {
    /// Encoded training points before the feature map.
    pub encoded_raw: Vec<EncodedPoint>,
    /// Encoded training points after the feature map (equal to the raw ones
    /// when the map is disabled).
    pub encoded_train: Vec<EncodedPoint>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub cfg: QknnConfig,
}

/// `½(1 + F)` clamped into `[0.5, 1]`.
fn distance_from_fidelity(f: f64) -> f64 {
    0.5 * (1.0 + f.clamp(0.0, 1.0))
}

/// Builds ancilla ⊗ a ⊗ b, applies `H`, controlled-SWAPs of matching qubits
/// and `H` again. The ancilla is qubit 0.
pub fn swap_test_state(a: &StateVector, b: &StateVector) -> Result<StateVector, QknnError> {
    if a.num_qubits() != b.num_qubits() {
        return Err(QknnError::DimensionMismatch {
            left: a.num_qubits(),
            right: b.num_qubits(),
        });
    }
    let d = a.num_qubits();
    let mut state = StateVector::zero(1)?.tensor(&a.tensor(b)?)?;
    state.apply(&Gate::h(0))?;
    for i in 0..d {
        state.apply_all(&Gate::controlled_swap(0, 1 + i, 1 + d + i))?;
    }
    state.apply(&Gate::h(0))?;
    Ok(state)
}

/// Probability that the swap-test ancilla reads 0.
pub fn swap_test_p0(a: &StateVector, b: &StateVector) -> Result<f64, QknnError> {
    Ok(swap_test_state(a, b)?.prob_zero(0)?)
}

fn sample_p0<R: Rng + ?Sized>(p0: f64, shots: usize, rng: &mut R) -> f64 {
    let p = p0.clamp(0.0, 1.0);
    let zeros = Binomial::new(shots as u64, p).expect("p in [0, 1]").sample(rng);
    zeros as f64 / shots as f64
}

/// Swap-test statistic between two encoded points.
pub fn quantum_distance<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    mode: DistanceMode,
    rng: &mut R,
) -> Result<f64, QknnError> {
    match mode {
        DistanceMode::Exact => Ok(distance_from_fidelity(a.fidelity(b).map_err(|_| {
            QknnError::DimensionMismatch {
                left: a.num_qubits(),
                right: b.num_qubits(),
            }
        })?)),
        DistanceMode::Sampled { shots } => {
            if shots == 0 {
                return Err(QknnError::ZeroShots);
            }
            let p0 = swap_test_p0(a, b)?;
            Ok(sample_p0(p0, shots, rng).clamp(0.5, 1.0))
        }
    }
}

/// Encodes a normalized row and applies the feature map if enabled.
pub fn prepare_point(x: &[f64], cfg: &QknnConfig, row: usize) -> Result<(EncodedPoint, EncodedPoint), QknnError> {
    let raw = encode_point(x, &cfg.encoding, row)?;
    let mapped = if cfg.use_feature_map {
        apply_feature_map(raw.clone(), &cfg.encoding)?
    } else {
        raw.clone()
    };
    Ok((raw, mapped))
}

fn ranked(scores: Vec<(usize, f64)>, k: usize) -> NeighborSet {
    let mut scores = scores;
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scores.truncate(k);
    let distances: Vec<f64> = scores.iter().map(|&(_, d)| d).collect();
    NeighborSet {
        indices: scores.iter().map(|&(i, _)| i).collect(),
        fidelities: distances.iter().map(|d| (2.0 * d - 1.0).clamp(0.0, 1.0)).collect(),
        distances,
    }
}

/// Majority vote over neighbour labels. Ties prefer the larger summed
/// fidelity, then the lower class index.
pub fn vote(neighbors: &NeighborSet, labels: &[usize], num_classes: usize) -> Prediction {
    let mut counts = vec![0usize; num_classes];
    let mut weight = vec![0.0f64; num_classes];
    for (&i, &f) in neighbors.indices.iter().zip(&neighbors.fidelities) {
        counts[labels[i]] += 1;
        weight[labels[i]] += f;
    }
    let label = (0..num_classes)
        .max_by(|&a, &b| {
            counts[a]
                .cmp(&counts[b])
                .then(weight[a].total_cmp(&weight[b]))
                .then(b.cmp(&a))
        })
        .unwrap_or(0);
    let total: f64 = weight.iter().sum();
    let scores = if total > 0.0 {
        weight.iter().map(|w| w / total).collect()
    } else {
        let n = neighbors.indices.len().max(1) as f64;
        counts.iter().map(|&c| c as f64 / n).collect()
    };
    Prediction { label, scores }
}

impl QknnModel {
    pub fn fit(train: &Dataset, cfg: QknnConfig) -> Result<Self, QknnError> {
        if train.is_empty() {
            return Err(QknnError::EmptyTrain);
        }
        if cfg.k == 0 || cfg.k > train.len() {
            return Err(QknnError::InvalidK {
                k: cfg.k,
                n_train: train.len(),
            });
        }
        let (encoded_raw, encoded_train) = train
            .features
            .iter()
            .enumerate()
            .map(|(row, x)| prepare_point(x, &cfg, row))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .unzip();
        Ok(Self {
            encoded_raw,
            encoded_train,
            labels: train.labels.clone(),
            num_classes: train.num_classes(),
            cfg,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn pair_rng(&self, master: u64, test_row: usize, train_idx: usize) -> rand_chacha::ChaCha8Rng {
        stream_rng(master, (test_row * self.len() + train_idx) as u64)
    }

    /// Noiseless neighbour search. `test` must already be encoded (and
    /// feature-mapped if the model uses the map).
    pub fn find_neighbors(&self, test: &EncodedPoint) -> Result<NeighborSet, QknnError> {
        let scores = self
            .encoded_train
            .iter()
            .enumerate()
            .map(|(j, train)| {
                let mut rng = self.pair_rng(self.cfg.seed, test.source_row, j);
                quantum_distance(&test.state, &train.state, self.cfg.distance, &mut rng).map(|d| (j, d))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ranked(scores, self.cfg.k))
    }

    pub fn classify(&self, test: &EncodedPoint) -> Result<Prediction, QknnError> {
        Ok(vote(&self.find_neighbors(test)?, &self.labels, self.num_classes))
    }

    /// One noisy realization of a register: the channel (or its
    /// code-corrected residual) at the configured injection points.
    fn noisy_register<R: Rng + ?Sized>(
        &self,
        raw: &EncodedPoint,
        mapped: &EncodedPoint,
        noise: &NoiseConfig,
        rng: &mut R,
    ) -> Result<StateVector, QknnError> {
        let qubits: Vec<usize> = (0..raw.num_qubits()).collect();
        let hit = |state: &mut StateVector, rng: &mut R| -> Result<(), QknnError> {
            match noise.mitigation {
                Mitigation::PhysicalCode(n) => {
                    let code = RepetitionCode::new(n).map_err(|_| QknnError::BadRepetitions(n))?;
                    for &q in &qubits {
                        if let Some(p) = residual_logical_error(&noise.spec, &code, rng) {
                            state.apply(&p.gate(q))?;
                        }
                    }
                }
                _ => {
                    apply_noise_logged(state, &noise.spec, &qubits, rng)?;
                }
            }
            Ok(())
        };
        match noise.injection {
            Injection::AfterFeatureMap => {
                let mut s = mapped.state.clone();
                hit(&mut s, rng)?;
                Ok(s)
            }
            Injection::AfterEncoding | Injection::Both => {
                let mut s = raw.state.clone();
                hit(&mut s, rng)?;
                if self.cfg.use_feature_map {
                    s.apply_all(&feature_map_gates(s.num_qubits(), &self.cfg.encoding))?;
                }
                if noise.injection == Injection::Both {
                    hit(&mut s, rng)?;
                }
                Ok(s)
            }
        }
    }

    fn noisy_distance(
        &self,
        test_raw: &EncodedPoint,
        test_mapped: &EncodedPoint,
        j: usize,
        noise: &NoiseConfig,
    ) -> Result<f64, QknnError> {
        let mut rng = self.pair_rng(noise.seed, test_raw.source_row, j);
        let repetitions = match noise.mitigation {
            Mitigation::RepeatVote(n) if n % 2 == 1 => n,
            Mitigation::RepeatVote(n) => return Err(QknnError::BadRepetitions(n)),
            _ => 1,
        };
        let mut p0s = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let t = self.noisy_register(test_raw, test_mapped, noise, &mut rng)?;
            let r = self.noisy_register(&self.encoded_raw[j], &self.encoded_train[j], noise, &mut rng)?;
            p0s.push(match self.cfg.distance {
                DistanceMode::Exact => distance_from_fidelity(t.fidelity(&r)?),
                DistanceMode::Sampled { .. } => swap_test_p0(&t, &r)?,
            });
        }
        match self.cfg.distance {
            DistanceMode::Exact => {
                p0s.sort_by(f64::total_cmp);
                Ok(p0s[repetitions / 2])
            }
            DistanceMode::Sampled { shots } => {
                if shots == 0 {
                    return Err(QknnError::ZeroShots);
                }
                if repetitions == 1 {
                    return Ok(sample_p0(p0s[0], shots, &mut rng).clamp(0.5, 1.0));
                }
                let zeros = (0..shots)
                    .filter(|_| {
                        let votes = p0s.iter().filter(|&&p| rng.random::<f64>() < p).count();
                        votes * 2 > repetitions
                    })
                    .count();
                Ok((zeros as f64 / shots as f64).clamp(0.5, 1.0))
            }
        }
    }

    /// Neighbour search with a fresh noise trajectory per swap test.
    pub fn find_neighbors_noisy(
        &self,
        test_raw: &EncodedPoint,
        test_mapped: &EncodedPoint,
        noise: &NoiseConfig,
    ) -> Result<NeighborSet, QknnError> {
        let scores = (0..self.len())
            .map(|j| self.noisy_distance(test_raw, test_mapped, j, noise).map(|d| (j, d)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ranked(scores, self.cfg.k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QknnOutput {
    pub predictions: Vec<usize>,
    pub scores: Vec<Vec<f64>>,
}

/// Encode, feature-map, (optionally) inject noise, measure swap-test
/// statistics and vote, for every test row. Rows run in parallel; results
/// do not depend on thread scheduling.
pub fn fit_predict(
    train: &Dataset,
    test: &Dataset,
    cfg: QknnConfig,
    noise: Option<NoiseConfig>,
) -> Result<QknnOutput, QknnError> {
    if !train.same_schema(test) {
        return Err(QknnError::SchemaMismatch);
    }
    let model = QknnModel::fit(train, cfg)?;
    let results = test
        .features
        .par_iter()
        .enumerate()
        .map(|(row, x)| {
            let (raw, mapped) = prepare_point(x, &cfg, row)?;
            let neighbors = match &noise {
                None => model.find_neighbors(&mapped)?,
                Some(n) => model.find_neighbors_noisy(&raw, &mapped, n)?,
            };
            Ok(vote(&neighbors, &model.labels, model.num_classes))
        })
        .collect::<Result<Vec<Prediction>, QknnError>>()?;
    Ok(QknnOutput {
        predictions: results.iter().map(|p| p.label).collect(),
        scores: results.into_iter().map(|p| p.scores).collect(),
    })
}

/// Seed used by noise trial `trial` of an experiment seeded with `master`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    derive_seed(master, trial)
}
