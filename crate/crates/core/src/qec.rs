//! n-qubit bit-flip repetition code.
//!
//! Stabilizers are `Z_i Z_{i+1}` for `i = 0..n-1`. A syndrome entry of `-1`
//! means qubits `i` and `i+1` disagree. Decoding is minimum weight: of the two
//! error patterns consistent with a syndrome (a pattern and its complement),
//! the lighter one is flipped. For odd `n` the choice is unique.
//!
//! Minimum-weight decoding of the 3-qubit code:
//!
//! | syndrome   | flip    |
//! |------------|---------|
//! | `[+1, +1]` | nothing |
//! | `[-1, +1]` | qubit 0 |
//! | `[-1, -1]` | qubit 1 |
//! | `[+1, -1]` | qubit 2 |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{NoiseSpec, Pauli};
use crate::qsim::{Gate, SimError, StateVector};

const DEFINITE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QecError {
    #[error("repetition code length must be odd and at least 3, got {0}")]
    InvalidLength(usize),
    #[error("logical bit must be 0 or 1, got {0}")]
    InvalidBit(u8),
    #[error("majority vote needs an odd, non-empty bit list, got {0} bits")]
    EvenVote(usize),
    #[error("state has {got} qubits but the code uses {expected}")]
    WrongSize { expected: usize, got: usize },
    #[error("stabilizer Z{0}Z{1} has no definite value (state is not a codeword with Pauli errors)")]
    IndefiniteSyndrome(usize, usize),
    #[error("syndrome length {got} does not match code length {n} (need {})", n - 1)]
    SyndromeLength { n: usize, got: usize },
    #[error("syndrome implies {weight} flips, more than the {max} this code corrects")]
    Uncorrectable { weight: usize, max: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionCode {
    n: usize,
}

impl RepetitionCode {
    pub fn new(n: usize) -> Result<Self, QecError> {
        if n < 3 || n % 2 == 0 {
            return Err(QecError::InvalidLength(n));
        }
        Ok(Self { n })
    }

    pub fn three() -> Self {
        Self { n: 3 }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest number of bit flips the code corrects.
    pub fn correctable(&self) -> usize {
        (self.n - 1) / 2
    }
}

/// Stabilizer outcomes, `+1` or `-1` per adjacent pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syndrome(pub Vec<i8>);

impl Syndrome {
    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&s| s == 1)
    }

    /// Syndrome of a classical bit string.
    pub fn from_bits(bits: &[u8]) -> Self {
        Syndrome(
            bits.windows(2)
                .map(|w| if w[0] == w[1] { 1 } else { -1 })
                .collect(),
        )
    }
}

/// `|b>^{⊗n}`.
pub fn encode_logical(bit: u8, code: &RepetitionCode) -> Result<StateVector, QecError> {
    if bit > 1 {
        return Err(QecError::InvalidBit(bit));
    }
    let index = if bit == 1 { (1usize << code.n) - 1 } else { 0 };
    Ok(StateVector::basis(code.n, index)?)
}

/// Reads each `Z_i Z_{i+1}`. Every stabilizer must have a definite outcome,
/// which holds for basis states and for codewords hit by Pauli errors.
pub fn measure_syndrome(state: &StateVector, code: &RepetitionCode) -> Result<Syndrome, QecError> {
    if state.num_qubits() != code.n {
        return Err(QecError::WrongSize {
            expected: code.n,
            got: state.num_qubits(),
        });
    }
    let n = code.n;
    let mut values = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let (mi, mj) = (1usize << (n - 1 - i), 1usize << (n - 2 - i));
        let zz: f64 = state
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let parity = ((k & mi) != 0) ^ ((k & mj) != 0);
                if parity {
                    -a.norm_sqr()
                } else {
                    a.norm_sqr()
                }
            })
            .sum();
        if (zz.abs() - 1.0).abs() > DEFINITE_TOL {
            return Err(QecError::IndefiniteSyndrome(i, i + 1));
        }
        values.push(if zz > 0.0 { 1 } else { -1 });
    }
    Ok(Syndrome(values))
}

/// Minimum-weight set of qubits to flip for `syndrome`.
pub fn decode_syndrome(syndrome: &Syndrome, code: &RepetitionCode) -> Result<Vec<usize>, QecError> {
    if syndrome.0.len() != code.n - 1 {
        return Err(QecError::SyndromeLength {
            n: code.n,
            got: syndrome.0.len(),
        });
    }
    // Error pattern with qubit 0 untouched; its complement is the other candidate.
    let mut pattern = vec![false; code.n];
    for (i, &s) in syndrome.0.iter().enumerate() {
        pattern[i + 1] = pattern[i] ^ (s == -1);
    }
    let weight = pattern.iter().filter(|&&e| e).count();
    if weight * 2 > code.n {
        pattern.iter_mut().for_each(|e| *e = !*e);
    }
    let flips: Vec<usize> = (0..code.n).filter(|&q| pattern[q]).collect();
    if flips.len() > code.correctable() {
        return Err(QecError::Uncorrectable {
            weight: flips.len(),
            max: code.correctable(),
        });
    }
    Ok(flips)
}

/// Applies X to the qubits chosen by [`decode_syndrome`].
pub fn correct(state: StateVector, syndrome: &Syndrome, code: &RepetitionCode) -> Result<StateVector, QecError> {
    let mut state = state;
    for q in decode_syndrome(syndrome, code)? {
        state.apply(&Gate::x(q))?;
    }
    Ok(state)
}

/// Majority value of an odd-length bit list.
pub fn majority_decode(bits: &[u8]) -> Result<u8, QecError> {
    if bits.is_empty() || bits.len() % 2 == 0 {
        return Err(QecError::EvenVote(bits.len()));
    }
    let ones = bits.iter().filter(|&&b| b != 0).count();
    Ok(u8::from(ones * 2 > bits.len()))
}

/// Logical error left on one code block after the channel hits each of its
/// physical qubits and the block is syndrome-corrected.
///
/// X components (from X or Y) are tracked as a bit-flip pattern and corrected
/// by minimum weight; a residual all-ones pattern is a logical X. Every Z
/// component acts as logical Z on the code space, so an odd count is a logical Z.
pub fn residual_logical_error<R: rand::Rng + ?Sized>(
    spec: &NoiseSpec,
    code: &RepetitionCode,
    rng: &mut R,
) -> Option<Pauli> {
    let mut flips = vec![0u8; code.n];
    let mut z_parity = false;
    for f in flips.iter_mut() {
        match spec.sample_error(rng) {
            Some(Pauli::X) => *f = 1,
            Some(Pauli::Y) => {
                *f = 1;
                z_parity ^= true;
            }
            Some(Pauli::Z) => z_parity ^= true,
            None => {}
        }
    }
    let logical_x = flips.iter().filter(|&&f| f == 1).count() > code.correctable();
    match (logical_x, z_parity) {
        (false, false) => None,
        (true, false) => Some(Pauli::X),
        (false, true) => Some(Pauli::Z),
        (true, true) => Some(Pauli::Y),
    }
}
