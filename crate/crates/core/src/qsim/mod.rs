//! Gate-level pure-state simulator.
//!
//! Basis ordering: qubit 0 is the most significant bit of the basis index, so
//! for `n` qubits, qubit `q` is bit `n - 1 - q`. `|01>` on two qubits is index 1
//! (qubit 1 set). Every module and test in this crate uses the same convention.

mod gate;
mod matrix;
mod state;

pub use gate::{Gate, GateKind};
pub use matrix::Matrix;
pub use state::{MeasurementSample, StateVector, DEFAULT_MAX_QUBITS};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("a state needs at least one qubit")]
    NoQubits,
    #[error("{requested} qubits exceeds the limit of {max} (2^{requested} amplitudes = {bytes} bytes)")]
    TooManyQubits {
        requested: usize,
        max: usize,
        bytes: u128,
    },
    #[error("qubit index {index} out of range for a {num_qubits}-qubit state")]
    InvalidQubit { index: usize, num_qubits: usize },
    #[error("qubit {0} listed more than once in gate targets")]
    DuplicateQubit(usize),
    #[error("{kind} takes {expected} target(s), got {got}")]
    WrongArity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("amplitude array length {0} is not a power of two")]
    BadLength(usize),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("shot count must be positive")]
    ZeroShots,
}
