//! Variational quantum classifier used as a baseline.
//!
//! Circuit: `RY(x_i)` angle embedding, then `L` layers of one trainable
//! rotation per qubit followed by a CNOT chain `i → i+1` (optionally closed
//! with `n-1 → 0`). Outputs are `<Z_i>` on the readout qubits.
//!
//! Binary problems read qubit 0 and use `p = (1 + <Z_0>)/2` with binary cross
//! entropy; problems with `C ≥ 3` classes read qubits `0..C` through a
//! softmax with categorical cross entropy.
//!
//! With [`LayerRotation::Rz`] every trainable gate is diagonal and every CNOT
//! permutes basis states, so `<Z_i>` does not depend on the parameters at all
//! and the gradient vanishes identically. [`LayerRotation::Ry`] is the
//! trainable default.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::datapipe::Dataset;
use crate::encoding::angle_embed;
use crate::qsim::{Gate, SimError, StateVector};

/// Probabilities are clamped to `[EPS, 1 - EPS]` inside the losses.
pub const EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnnError {
    #[error("expected {expected} inputs, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("{classes} classes need at least {classes} qubits, have {qubits}")]
    TooFewQubits { classes: usize, qubits: usize },
    #[error("need at least 2 classes and 1 layer")]
    BadArchitecture,
    #[error("label {label} out of range for {classes} classes")]
    BadLabel { label: usize, classes: usize },
    #[error("learning rate must be positive")]
    BadLearningRate,
    #[error("loss became {loss} at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, loss: f64 },
    #[error("empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerRotation {
    Rz,
    #[default]
    Ry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    OpenChain,
    #[default]
    Ring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnArchitecture {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub n_classes: usize,
    pub rotation: LayerRotation,
    pub entangler: Entangler,
    /// `params[l][i]` is the rotation angle on qubit `i` in layer `l`.
    pub params: Vec<Vec<f64>>,
}

impl QnnArchitecture {
    /// All-zero parameters.
    pub fn new(n_qubits: usize, n_layers: usize, n_classes: usize) -> Result<Self, QnnError> {
        if n_classes < 2 || n_layers == 0 || n_qubits == 0 {
            return Err(QnnError::BadArchitecture);
        }
        let arch = Self {
            n_qubits,
            n_layers,
            n_classes,
            rotation: LayerRotation::default(),
            entangler: Entangler::default(),
            params: vec![vec![0.0; n_qubits]; n_layers],
        };
        if arch.readout_qubits() > n_qubits {
            return Err(QnnError::TooFewQubits {
                classes: n_classes,
                qubits: n_qubits,
            });
        }
        Ok(arch)
    }

    /// RZ rotations with an open CNOT chain.
    pub fn literal(mut self) -> Self {
        self.rotation = LayerRotation::Rz;
        self.entangler = Entangler::OpenChain;
        self
    }

    pub fn with_params(mut self, params: Vec<Vec<f64>>) -> Self {
        self.params = params;
        self
    }

    pub fn is_binary(&self) -> bool {
        self.n_classes == 2
    }

    pub fn readout_qubits(&self) -> usize {
        if self.is_binary() {
            1
        } else {
            self.n_classes
        }
    }

    pub fn num_params(&self) -> usize {
        self.n_layers * self.n_qubits
    }

    fn layer_gates(&self, layer: usize) -> Vec<Gate> {
        let n = self.n_qubits;
        let mut gates: Vec<Gate> = (0..n)
            .map(|q| match self.rotation {
                LayerRotation::Rz => Gate::rz(q, self.params[layer][q]),
                LayerRotation::Ry => Gate::ry(q, self.params[layer][q]),
            })
            .collect();
        gates.extend((0..n.saturating_sub(1)).map(|i| Gate::cnot(i, i + 1)));
        if self.entangler == Entangler::Ring && n > 2 {
            gates.push(Gate::cnot(n - 1, 0));
        }
        gates
    }

    /// Full gate list for input `x` (embedding included).
    pub fn circuit(&self, x: &[f64]) -> Vec<Gate> {
        let mut gates: Vec<Gate> = x.iter().enumerate().map(|(q, &v)| Gate::ry(q, v)).collect();
        for l in 0..self.n_layers {
            gates.extend(self.layer_gates(l));
        }
        gates
    }

    /// Raw readout `<Z_i>` for the readout qubits.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, QnnError> {
        if x.len() != self.n_qubits {
            return Err(QnnError::ShapeMismatch {
                expected: self.n_qubits,
                got: x.len(),
            });
        }
        let mut state = angle_embed(x, self.n_qubits).map_err(|e| match e {
            crate::encoding::EncodingError::Sim(s) => QnnError::Sim(s),
            _ => QnnError::ShapeMismatch {
                expected: self.n_qubits,
                got: x.len(),
            },
        })?;
        for l in 0..self.n_layers {
            state.apply_all(&self.layer_gates(l))?;
        }
        readout(&state, self.readout_qubits())
    }

    /// Class probabilities (length `n_classes`).
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, QnnError> {
        let z = self.forward(x)?;
        Ok(if self.is_binary() {
            let p = binary_probability(z[0]);
            vec![1.0 - p, p]
        } else {
            softmax(&z)
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize, QnnError> {
        let p = self.predict_proba(x)?;
        Ok(argmax(&p))
    }
}

fn readout(state: &StateVector, qubits: usize) -> Result<Vec<f64>, QnnError> {
    (0..qubits).map(|q| Ok(state.z_expectation(q)?)).collect()
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &x)| if x > bv { (i, x) } else { (bi, bv) })
        .0
}

/// `(1 + z) / 2`.
pub fn binary_probability(z: f64) -> f64 {
    (0.5 * (1.0 + z)).clamp(0.0, 1.0)
}

/// Softmax with max subtraction.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Mean binary cross entropy with clamped probabilities.
pub fn bce_loss(y: &[f64], y_hat: &[f64]) -> Result<f64, QnnError> {
    if y.len() != y_hat.len() {
        return Err(QnnError::ShapeMismatch {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(QnnError::EmptyBatch);
    }
    let total: f64 = y
        .iter()
        .zip(y_hat)
        .map(|(&t, &p)| {
            let p = p.clamp(EPS, 1.0 - EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / y.len() as f64)
}

/// Mean categorical cross entropy over rows.
pub fn cce_loss(y: &[Vec<f64>], y_hat: &[Vec<f64>]) -> Result<f64, QnnError> {
    if y.len() != y_hat.len() {
        return Err(QnnError::ShapeMismatch {
            expected: y.len(),
            got: y_hat.len(),
        });
    }
    if y.is_empty() {
        return Err(QnnError::EmptyBatch);
    }
    let mut total = 0.0;
    for (t, p) in y.iter().zip(y_hat) {
        if t.len() != p.len() {
            return Err(QnnError::ShapeMismatch {
                expected: t.len(),
                got: p.len(),
            });
        }
        total -= t
            .iter()
            .zip(p)
            .map(|(&ti, &pi)| ti * pi.clamp(EPS, 1.0).ln())
            .sum::<f64>();
    }
    Ok(total / y.len() as f64)
}

/// Inputs (already scaled to angles) and integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Batch {
    /// Scales `[0, 1]` features to `[0, π]` angles.
    pub fn from_normalized(d: &Dataset) -> Self {
        Self {
            inputs: d
                .features
                .iter()
                .map(|r| r.iter().map(|v| v * PI).collect())
                .collect(),
            labels: d.labels.clone(),
        }
    }

    fn check(&self, arch: &QnnArchitecture) -> Result<(), QnnError> {
        if self.inputs.is_empty() {
            return Err(QnnError::EmptyBatch);
        }
        if let Some(&label) = self.labels.iter().find(|&&l| l >= arch.n_classes) {
            return Err(QnnError::BadLabel {
                label,
                classes: arch.n_classes,
            });
        }
        Ok(())
    }
}

fn instance_loss(arch: &QnnArchitecture, z: &[f64], label: usize) -> f64 {
    if arch.is_binary() {
        let p = binary_probability(z[0]).clamp(EPS, 1.0 - EPS);
        if label == 1 {
            -p.ln()
        } else {
            -(1.0 - p).ln()
        }
    } else {
        -softmax(z)[label].clamp(EPS, 1.0).ln()
    }
}

// ∂loss/∂z for one instance.
fn loss_grad_z(arch: &QnnArchitecture, z: &[f64], label: usize) -> Vec<f64> {
    if arch.is_binary() {
        let raw = binary_probability(z[0]);
        let p = raw.clamp(EPS, 1.0 - EPS);
        if p != raw {
            return vec![0.0];
        }
        let y = if label == 1 { 1.0 } else { 0.0 };
        // dL/dp = -(y/p - (1-y)/(1-p)); dp/dz = 1/2
        vec![-0.5 * (y / p - (1.0 - y) / (1.0 - p))]
    } else {
        let mut g = softmax(z);
        g[label] -= 1.0;
        g
    }
}

/// Mean loss over the batch.
pub fn batch_loss(arch: &QnnArchitecture, batch: &Batch) -> Result<f64, QnnError> {
    batch.check(arch)?;
    let losses = batch
        .inputs
        .par_iter()
        .zip(&batch.labels)
        .map(|(x, &y)| Ok(instance_loss(arch, &arch.forward(x)?, y)))
        .collect::<Result<Vec<f64>, QnnError>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Gradient of [`batch_loss`] by the parameter-shift rule: for each angle,
/// `∂<Z>/∂θ = (<Z>(θ + π/2) − <Z>(θ − π/2)) / 2`, chained through the loss.
pub fn gradient(arch: &QnnArchitecture, batch: &Batch) -> Result<Vec<Vec<f64>>, QnnError> {
    batch.check(arch)?;
    let per_instance = batch
        .inputs
        .par_iter()
        .zip(&batch.labels)
        .map(|(x, &y)| {
            let z = arch.forward(x)?;
            let dl_dz = loss_grad_z(arch, &z, y);
            let mut grad = vec![vec![0.0; arch.n_qubits]; arch.n_layers];
            let mut shifted = arch.clone();
            for l in 0..arch.n_layers {
                for q in 0..arch.n_qubits {
                    let theta = arch.params[l][q];
                    shifted.params[l][q] = theta + FRAC_PI_2;
                    let plus = shifted.forward(x)?;
                    shifted.params[l][q] = theta - FRAC_PI_2;
                    let minus = shifted.forward(x)?;
                    shifted.params[l][q] = theta;
                    grad[l][q] = dl_dz
                        .iter()
                        .zip(plus.iter().zip(&minus))
                        .map(|(g, (p, m))| g * 0.5 * (p - m))
                        .sum();
                }
            }
            Ok(grad)
        })
        .collect::<Result<Vec<_>, QnnError>>()?;
    let n = per_instance.len() as f64;
    let mut total = vec![vec![0.0; arch.n_qubits]; arch.n_layers];
    for g in per_instance {
        for (row, grow) in total.iter_mut().zip(g) {
            for (t, v) in row.iter_mut().zip(grow) {
                *t += v;
            }
        }
    }
    total.iter_mut().flatten().for_each(|v| *v /= n);
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial angles are uniform in `(-init_scale, init_scale)`.
    pub init_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 50,
            seed: 0,
            init_scale: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOutcome {
    pub arch: QnnArchitecture,
    /// Loss at the start of each epoch, followed by the final loss.
    pub loss_history: Vec<f64>,
}

/// Seeded random initialization in `(-scale, scale)`.
pub fn init_params(arch: &mut QnnArchitecture, scale: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in arch.params.iter_mut().flatten() {
        *v = if scale > 0.0 { rng.random_range(-scale..scale) } else { 0.0 };
    }
}

/// Full-batch gradient descent. Parameters are taken as given; call
/// [`init_params`] first for a random start.
pub fn train(arch: QnnArchitecture, batch: &Batch, cfg: &TrainConfig) -> Result<TrainOutcome, QnnError> {
    if !(cfg.learning_rate > 0.0) {
        return Err(QnnError::BadLearningRate);
    }
    batch.check(&arch)?;
    let mut arch = arch;
    let mut loss_history = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let loss = batch_loss(&arch, batch)?;
        if !loss.is_finite() {
            return Err(QnnError::NonFiniteLoss { epoch, loss });
        }
        loss_history.push(loss);
        let grad = gradient(&arch, batch)?;
        for (p, g) in arch.params.iter_mut().flatten().zip(grad.iter().flatten()) {
            *p -= cfg.learning_rate * g;
        }
    }
    let final_loss = batch_loss(&arch, batch)?;
    if !final_loss.is_finite() {
        return Err(QnnError::NonFiniteLoss {
            epoch: cfg.epochs,
            loss: final_loss,
        });
    }
    loss_history.push(final_loss);
    Ok(TrainOutcome { arch, loss_history })
}

pub fn accuracy(arch: &QnnArchitecture, batch: &Batch) -> Result<f64, QnnError> {
    let hits = batch
        .inputs
        .iter()
        .zip(&batch.labels)
        .map(|(x, &y)| arch.predict(x).map(|p| usize::from(p == y)))
        .sum::<Result<usize, _>>()?;
    Ok(hits as f64 / batch.inputs.len() as f64)
}
