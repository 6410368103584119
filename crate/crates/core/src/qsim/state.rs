use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use super::SimError;

pub const DEFAULT_MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Pure state of `num_qubits` qubits. See the module docs for bit ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Aggregated outcome count for one computational basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementSample {
    pub basis_index: usize,
    pub shot_count: usize,
}

fn check_size(n: usize, max: usize) -> Result<(), SimError> {
    if n == 0 {
        return Err(SimError::NoQubits);
    }
    if n > max {
        return Err(SimError::TooManyQubits {
            requested: n,
            max,
            bytes: (1u128 << n.min(100)) * std::mem::size_of::<Complex64>() as u128,
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `n` qubits, capped at [`DEFAULT_MAX_QUBITS`].
    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::zero_with_limit(n, DEFAULT_MAX_QUBITS)
    }

    pub fn zero_with_limit(n: usize, max_qubits: usize) -> Result<Self, SimError> {
        Self::basis_with_limit(n, 0, max_qubits)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Result<Self, SimError> {
        Self::basis_with_limit(n, index, DEFAULT_MAX_QUBITS)
    }

    fn basis_with_limit(n: usize, index: usize, max_qubits: usize) -> Result<Self, SimError> {
        check_size(n, max_qubits)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(SimError::InvalidQubit {
                index,
                num_qubits: n,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Wraps an amplitude array. The array must have power-of-two length and unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, SimError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(SimError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_size(num_qubits, DEFAULT_MAX_QUBITS)?;
        let state = Self {
            num_qubits,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Born probabilities `|a_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    #[inline]
    fn mask(&self, q: usize) -> usize {
        1 << (self.num_qubits - 1 - q)
    }

    fn check_qubit(&self, q: usize) -> Result<(), SimError> {
        if q >= self.num_qubits {
            Err(SimError::InvalidQubit {
                index: q,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }

    fn validate(&self, gate: &Gate) -> Result<(), SimError> {
        let expected = gate.kind.arity();
        if gate.targets.len() != expected {
            return Err(SimError::WrongArity {
                kind: gate.kind,
                expected,
                got: gate.targets.len(),
            });
        }
        for (i, &q) in gate.targets.iter().enumerate() {
            self.check_qubit(q)?;
            if gate.targets[..i].contains(&q) {
                return Err(SimError::DuplicateQubit(q));
            }
        }
        Ok(())
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        self.validate(gate)?;
        let t = &gate.targets;
        match gate.kind {
            GateKind::X => self.apply_x(t[0]),
            GateKind::Z => self.apply_phase(t[0], -ONE),
            GateKind::S => self.apply_phase(t[0], Complex64::new(0.0, 1.0)),
            GateKind::T => self.apply_phase(t[0], Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Rz(theta) => self.apply_diagonal(
                t[0],
                Complex64::from_polar(1.0, -theta / 2.0),
                Complex64::from_polar(1.0, theta / 2.0),
            ),
            GateKind::H | GateKind::Y | GateKind::Ry(_) => {
                let m = gate.kind.matrix();
                self.apply_single(t[0], [[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]]);
            }
            GateKind::Cnot => self.apply_cnot(t[0], t[1]),
            GateKind::Swap => self.apply_swap(t[0], t[1]),
            GateKind::Toffoli => self.apply_toffoli(t[0], t[1], t[2]),
            GateKind::IsingXy(theta) => self.apply_ising_xy(t[0], t[1], theta),
        }
        debug_assert!(
            (self.norm_sqr() - 1.0).abs() <= NORM_TOL,
            "norm drifted after {gate}"
        );
        Ok(())
    }

    /// Applies gates in order, stopping at the first invalid one.
    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<(), SimError> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    /// Value-style [`StateVector::apply`].
    pub fn applied(mut self, gate: &Gate) -> Result<Self, SimError> {
        self.apply(gate)?;
        Ok(self)
    }

    // 2x2 kernel over amplitude pairs (i, i | mask) with bit q clear.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = self.mask(q);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(mask << 1) {
            for i in block..block + mask {
                let a0 = amps[i];
                let a1 = amps[i | mask];
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_x(&mut self, q: usize) {
        let mask = self.mask(q);
        let amps = &mut self.amplitudes;
        for block in (0..amps.len()).step_by(mask << 1) {
            for i in block..block + mask {
                amps.swap(i, i | mask);
            }
        }
    }

    fn apply_phase(&mut self, q: usize, phase: Complex64) {
        let mask = self.mask(q);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if i & mask != 0 {
                *a *= phase;
            }
        }
    }

    fn apply_diagonal(&mut self, q: usize, d0: Complex64, d1: Complex64) {
        let mask = self.mask(q);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & mask == 0 { d0 } else { d1 };
        }
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        let cm = self.mask(control);
        let tm = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let am = self.mask(a);
        let bm = self.mask(b);
        for i in 0..self.amplitudes.len() {
            if i & am != 0 && i & bm == 0 {
                self.amplitudes.swap(i, (i & !am) | bm);
            }
        }
    }

    fn apply_toffoli(&mut self, c0: usize, c1: usize, target: usize) {
        let cm = self.mask(c0) | self.mask(c1);
        let tm = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cm == cm && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }

    // Rotates within span{|01>, |10>} of the pair; |00> and |11> are untouched.
    fn apply_ising_xy(&mut self, a: usize, b: usize, theta: f64) {
        let am = self.mask(a);
        let bm = self.mask(b);
        let (s, c) = theta.sin_cos();
        let ms = Complex64::new(0.0, -s);
        for i in 0..self.amplitudes.len() {
            if i & am == 0 && i & bm != 0 {
                let j = (i | am) & !bm;
                let v01 = self.amplitudes[i];
                let v10 = self.amplitudes[j];
                self.amplitudes[i] = v01 * c + ms * v10;
                self.amplitudes[j] = ms * v01 + v10 * c;
            }
        }
    }

    /// `<self|other> = Σ conj(self_i) other_i`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64, SimError> {
        if self.num_qubits != other.num_qubits {
            return Err(SimError::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64, SimError> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    /// `<Z_q>`: +1 weight where bit `q` is 0, -1 where it is 1.
    pub fn z_expectation(&self, q: usize) -> Result<f64, SimError> {
        self.check_qubit(q)?;
        let mask = self.mask(q);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Probability that qubit `q` reads 0.
    pub fn prob_zero(&self, q: usize) -> Result<f64, SimError> {
        Ok(0.5 * (1.0 + self.z_expectation(q)?))
    }

    /// `self ⊗ other`; `self` occupies the low-numbered (high-order) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector, SimError> {
        let n = self.num_qubits + other.num_qubits;
        check_size(n, DEFAULT_MAX_QUBITS)?;
        let mut amplitudes = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(StateVector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Index of the basis state this vector equals (up to phase), if any.
    pub fn as_basis_index(&self, tol: f64) -> Option<usize> {
        let (idx, p) = self
            .amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        ((1.0 - p).abs() <= tol).then_some(idx)
    }

    /// Draws `shots` basis indices i.i.d. from the Born distribution.
    pub fn sample_indices<R: Rng + ?Sized>(&self, shots: usize, rng: &mut R) -> Result<Vec<usize>, SimError> {
        if shots == 0 {
            return Err(SimError::ZeroShots);
        }
        let mut cdf = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cdf.push(acc);
        }
        let total = acc;
        let last = cdf.len() - 1;
        Ok((0..shots)
            .map(|_| {
                let u = rng.random::<f64>() * total;
                cdf.partition_point(|&c| c <= u).min(last)
            })
            .collect())
    }

    /// Samples `shots` measurements with a ChaCha8 stream seeded by `seed`,
    /// aggregated per basis index (ascending).
    pub fn sample_basis(&self, shots: usize, seed: u64) -> Result<Vec<MeasurementSample>, SimError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = self.sample_indices(shots, &mut rng)?;
        let mut counts = vec![0usize; self.amplitudes.len()];
        for d in draws {
            counts[d] += 1;
        }
        Ok(counts
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(basis_index, shot_count)| MeasurementSample {
                basis_index,
                shot_count,
            })
            .collect())
    }
}
