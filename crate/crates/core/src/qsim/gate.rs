use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;

/// Gate kinds supported by the simulator. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    /// `diag(e^{-iθ/2}, e^{iθ/2})`
    Rz(f64),
    /// `exp(-iθY/2)`
    Ry(f64),
    /// Targets are `[control, target]`.
    Cnot,
    Swap,
    /// Targets are `[control, control, target]`.
    Toffoli,
    /// `exp(-iθ/2 (XX + YY))`. Mixes `|01>` and `|10>`, leaves `|00>` and `|11>` alone.
    IsingXy(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::H
            | GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::S
            | GateKind::T
            | GateKind::Rz(_)
            | GateKind::Ry(_) => 1,
            GateKind::Cnot | GateKind::Swap | GateKind::IsingXy(_) => 2,
            GateKind::Toffoli => 3,
        }
    }

    pub fn is_self_inverse(&self) -> bool {
        matches!(
            self,
            GateKind::H
                | GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::Cnot
                | GateKind::Swap
                | GateKind::Toffoli
        )
    }

    /// Dense unitary on the gate's own targets. The first target is the most
    /// significant bit of the local index, matching the state ordering.
    ///
    /// Toffoli is the standard CCX permutation (swaps local rows 6 and 7).
    pub fn matrix(&self) -> Matrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match *self {
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                Matrix::from_rows(&[&[h, h], &[h, -h]])
            }
            GateKind::X => Matrix::from_rows(&[&[o, l], &[l, o]]),
            GateKind::Y => Matrix::from_rows(&[&[o, -i], &[i, o]]),
            GateKind::Z => Matrix::from_rows(&[&[l, o], &[o, -l]]),
            GateKind::S => Matrix::from_rows(&[&[l, o], &[o, i]]),
            GateKind::T => Matrix::from_rows(&[
                &[l, o],
                &[o, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            ]),
            GateKind::Rz(theta) => Matrix::from_rows(&[
                &[Complex64::from_polar(1.0, -theta / 2.0), o],
                &[o, Complex64::from_polar(1.0, theta / 2.0)],
            ]),
            GateKind::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                Matrix::from_rows(&[
                    &[Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    &[Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ])
            }
            GateKind::Cnot => Matrix::from_rows(&[
                &[l, o, o, o],
                &[o, l, o, o],
                &[o, o, o, l],
                &[o, o, l, o],
            ]),
            GateKind::Swap => Matrix::from_rows(&[
                &[l, o, o, o],
                &[o, o, l, o],
                &[o, l, o, o],
                &[o, o, o, l],
            ]),
            GateKind::IsingXy(theta) => {
                let (s, c) = theta.sin_cos();
                let c = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                Matrix::from_rows(&[
                    &[l, o, o, o],
                    &[o, c, ms, o],
                    &[o, ms, c, o],
                    &[o, o, o, l],
                ])
            }
            GateKind::Toffoli => {
                let mut m = Matrix::identity(8);
                m.set(6, 6, o);
                m.set(7, 7, o);
                m.set(6, 7, l);
                m.set(7, 6, l);
                m
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Rz(t) => write!(f, "RZ({t})"),
            GateKind::Ry(t) => write!(f, "RY({t})"),
            GateKind::IsingXy(t) => write!(f, "IsingXY({t})"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// A gate kind bound to the qubits it acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        Self {
            kind,
            targets: targets.to_vec(),
        }
    }

    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, &[q])
    }
    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, &[q])
    }
    pub fn y(q: usize) -> Self {
        Self::new(GateKind::Y, &[q])
    }
    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, &[q])
    }
    pub fn s(q: usize) -> Self {
        Self::new(GateKind::S, &[q])
    }
    pub fn t(q: usize) -> Self {
        Self::new(GateKind::T, &[q])
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz(theta), &[q])
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Ry(theta), &[q])
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, &[control, target])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, &[a, b])
    }
    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Self {
        Self::new(GateKind::Toffoli, &[c0, c1, target])
    }
    pub fn ising_xy(a: usize, b: usize, theta: f64) -> Self {
        Self::new(GateKind::IsingXy(theta), &[a, b])
    }

    /// Controlled-SWAP of `a` and `b`, decomposed as `CNOT(b,a) CCX(c,a,b) CNOT(b,a)`.
    pub fn controlled_swap(control: usize, a: usize, b: usize) -> [Gate; 3] {
        [
            Gate::cnot(b, a),
            Gate::toffoli(control, a, b),
            Gate::cnot(b, a),
        ]
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.kind, self.targets)
    }
}
