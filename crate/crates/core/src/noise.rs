//! Single-qubit Pauli channels realized by trajectory sampling.
//!
//! Each listed qubit independently suffers its channel's Pauli with
//! probability `p` (for [`NoiseKind::MixedPauli`], X, Z or Y with `p/3` each).
//! The state stays pure; averaging `|ψ><ψ|` over trajectories reproduces the
//! Kraus-sum density matrix given by [`expected_density_effect`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{Gate, Matrix, SimError, StateVector};
use crate::seeding::stream_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("noise probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("unknown noise kind '{0}'")]
    UnknownKind(String),
    #[error("trajectory count must be positive")]
    ZeroShots,
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    MixedPauli,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::BitFlip => "bit_flip",
            NoiseKind::PhaseFlip => "phase_flip",
            NoiseKind::BitPhaseFlip => "bit_phase_flip",
            NoiseKind::MixedPauli => "mixed_pauli",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "bit_flip" => Ok(NoiseKind::BitFlip),
            "phase_flip" => Ok(NoiseKind::PhaseFlip),
            "bit_phase_flip" => Ok(NoiseKind::BitPhaseFlip),
            "mixed_pauli" | "depolarizing" => Ok(NoiseKind::MixedPauli),
            _ => Err(NoiseError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn gate(self, q: usize) -> Gate {
        match self {
            Pauli::X => Gate::x(q),
            Pauli::Y => Gate::y(q),
            Pauli::Z => Gate::z(q),
        }
    }

    pub fn matrix(self) -> Matrix {
        self.gate(0).kind.matrix()
    }

    /// X and Y flip the computational basis value; Z does not.
    pub fn flips_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self, NoiseError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(NoiseError::InvalidProbability(p));
        }
        Ok(Self { kind, p })
    }

    /// Branches of the channel other than identity, with their probabilities.
    pub fn branches(&self) -> Vec<(Pauli, f64)> {
        match self.kind {
            NoiseKind::BitFlip => vec![(Pauli::X, self.p)],
            NoiseKind::PhaseFlip => vec![(Pauli::Z, self.p)],
            NoiseKind::BitPhaseFlip => vec![(Pauli::Y, self.p)],
            NoiseKind::MixedPauli => {
                let third = self.p / 3.0;
                vec![(Pauli::X, third), (Pauli::Z, third), (Pauli::Y, third)]
            }
        }
    }

    /// Draws the error (if any) hitting one qubit.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Pauli> {
        let u: f64 = rng.random();
        if u >= self.p {
            return None;
        }
        Some(match self.kind {
            NoiseKind::BitFlip => Pauli::X,
            NoiseKind::PhaseFlip => Pauli::Z,
            NoiseKind::BitPhaseFlip => Pauli::Y,
            NoiseKind::MixedPauli => [Pauli::X, Pauli::Z, Pauli::Y][rng.random_range(0..3)],
        })
    }
}

/// One sampled error: which qubit and which Pauli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedError {
    pub qubit: usize,
    pub pauli: Pauli,
}

/// Applies one noise trajectory in place and returns the sampled errors.
pub fn apply_noise_logged<R: Rng + ?Sized>(
    state: &mut StateVector,
    spec: &NoiseSpec,
    qubits: &[usize],
    rng: &mut R,
) -> Result<Vec<AppliedError>, NoiseError> {
    if let Some(&bad) = qubits.iter().find(|&&q| q >= state.num_qubits()) {
        return Err(SimError::InvalidQubit {
            index: bad,
            num_qubits: state.num_qubits(),
        }
        .into());
    }
    let mut log = Vec::new();
    for &q in qubits {
        if let Some(pauli) = spec.sample_error(rng) {
            state.apply(&pauli.gate(q))?;
            log.push(AppliedError { qubit: q, pauli });
        }
    }
    Ok(log)
}

/// Value-style single trajectory.
pub fn apply_noise<R: Rng + ?Sized>(
    mut state: StateVector,
    spec: &NoiseSpec,
    qubits: &[usize],
    rng: &mut R,
) -> Result<StateVector, NoiseError> {
    apply_noise_logged(&mut state, spec, qubits, rng)?;
    Ok(state)
}

/// Exact channel output `Σ_k K_k ρ K_k†` for a single-qubit pure input.
pub fn expected_density_effect(spec: &NoiseSpec, input: &StateVector) -> Result<Matrix, NoiseError> {
    if input.num_qubits() != 1 {
        return Err(SimError::DimensionMismatch {
            left: input.num_qubits(),
            right: 1,
        }
        .into());
    }
    let amps = input.amplitudes();
    let rho = Matrix::outer(amps, amps);
    let total: f64 = spec.branches().iter().map(|(_, w)| w).sum();
    let mut out = rho.scale(1.0 - total);
    for (pauli, weight) in spec.branches() {
        let m = pauli.matrix();
        out = out.add(&m.mul(&rho).mul(&m.adjoint()).scale(weight));
    }
    Ok(out)
}

/// Error logs for `shots` trajectories. Trajectory `i` draws from a stream
/// derived from `(seed, i)`, so any single trajectory can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub shots: usize,
    pub seed: u64,
    pub errors: Vec<Vec<AppliedError>>,
}

impl TrajectoryBatch {
    /// Runs `shots` trajectories of `spec` on `qubits` of `state`, calling
    /// `visit` with each resulting trajectory state.
    pub fn run(
        state: &StateVector,
        spec: &NoiseSpec,
        qubits: &[usize],
        shots: usize,
        seed: u64,
        mut visit: impl FnMut(&StateVector),
    ) -> Result<Self, NoiseError> {
        if shots == 0 {
            return Err(NoiseError::ZeroShots);
        }
        let mut errors = Vec::with_capacity(shots);
        for shot in 0..shots {
            let mut rng = stream_rng(seed, shot as u64);
            let mut traj = state.clone();
            errors.push(apply_noise_logged(&mut traj, spec, qubits, &mut rng)?);
            visit(&traj);
        }
        Ok(Self { shots, seed, errors })
    }

    /// Fraction of trajectories in which `qubit` received an error matching `pred`.
    pub fn error_frequency(&self, qubit: usize, pred: impl Fn(Pauli) -> bool) -> f64 {
        let hits = self
            .errors
            .iter()
            .filter(|log| log.iter().any(|e| e.qubit == qubit && pred(e.pauli)))
            .count();
        hits as f64 / self.shots as f64
    }
}

/// Mean of `|ψ><ψ|` over trajectories. Dense, so only for small registers.
pub fn trajectory_density(
    state: &StateVector,
    spec: &NoiseSpec,
    qubits: &[usize],
    shots: usize,
    seed: u64,
) -> Result<Matrix, NoiseError> {
    let dim = state.amplitudes().len();
    let mut acc = Matrix::zeros(dim);
    TrajectoryBatch::run(state, spec, qubits, shots, seed, |traj| {
        let a = traj.amplitudes();
        for i in 0..dim {
            for j in 0..dim {
                let v = acc.get(i, j) + a[i] * a[j].conj();
                acc.set(i, j, v);
            }
        }
    })?;
    Ok(acc.scale(1.0 / shots as f64))
}
