//! Classical-to-quantum encodings.
//!
//! [`encode_point`] writes each normalized feature into the phase of its own
//! qubit (`RZ(scale·x) H |0>`), [`apply_feature_map`] entangles neighbouring
//! qubits with `IsingXY` + `CNOT`, and [`angle_embed`] is the `RY` embedding used
//! by the variational classifier.
//!
//! With the default scale of `2π`, `x = 0` and `x = 1` land on the same state up
//! to global phase. The scale is configurable for that reason.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{Gate, SimError, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("feature vector is empty")]
    Empty,
    #[error("feature {index} = {value} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("expected {expected} features, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("angle scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Qubit pairs that receive the entangling gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntangleTopology {
    /// Pairs `(i, i + 1)` for `i = 0..d-1`.
    #[default]
    LinearChain,
}

impl EntangleTopology {
    pub fn pairs(&self, d: usize) -> Vec<(usize, usize)> {
        match self {
            EntangleTopology::LinearChain => (0..d.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    /// Radians of `RZ` per unit feature.
    pub angle_scale: f64,
    /// `IsingXY` angle used by the feature map.
    pub feature_map_angle: f64,
    pub topology: EntangleTopology,
}

impl Default for EncodingConfig {
    fn default() -> Self {
        Self {
            angle_scale: 2.0 * PI,
            feature_map_angle: FRAC_PI_2,
            topology: EntangleTopology::LinearChain,
        }
    }
}

impl EncodingConfig {
    pub fn validate(&self) -> Result<(), EncodingError> {
        if !(self.angle_scale > 0.0 && self.angle_scale.is_finite()) {
            return Err(EncodingError::InvalidScale(self.angle_scale));
        }
        Ok(())
    }
}

/// An encoded data point and the dataset row it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPoint {
    pub state: StateVector,
    pub source_row: usize,
}

impl EncodedPoint {
    pub fn num_qubits(&self) -> usize {
        self.state.num_qubits()
    }
}

/// `⊗_i RZ(scale·x_i) H |0>`, one qubit per feature.
pub fn encode_point(x: &[f64], cfg: &EncodingConfig, source_row: usize) -> Result<EncodedPoint, EncodingError> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(EncodingError::Empty);
    }
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(EncodingError::OutOfRange { index, value });
    }
    let mut state = StateVector::zero(x.len())?;
    for (q, &v) in x.iter().enumerate() {
        state.apply(&Gate::h(q))?;
        state.apply(&Gate::rz(q, cfg.angle_scale * v))?;
    }
    Ok(EncodedPoint { state, source_row })
}

/// Gate list of the feature map on `d` qubits: `IsingXY(θ)` then `CNOT` on each
/// topology pair, pairs in ascending order.
pub fn feature_map_gates(d: usize, cfg: &EncodingConfig) -> Vec<Gate> {
    cfg.topology
        .pairs(d)
        .into_iter()
        .flat_map(|(a, b)| [Gate::ising_xy(a, b, cfg.feature_map_angle), Gate::cnot(a, b)])
        .collect()
}

/// Applies the shared entangling unitary. Identity when `d = 1`.
pub fn apply_feature_map(mut point: EncodedPoint, cfg: &EncodingConfig) -> Result<EncodedPoint, EncodingError> {
    let gates = feature_map_gates(point.num_qubits(), cfg);
    point.state.apply_all(&gates)?;
    Ok(point)
}

/// `⊗_i RY(x_i) |0>`. Inputs are expected in `[0, π]`, not checked.
pub fn angle_embed(x: &[f64], n_qubits: usize) -> Result<StateVector, EncodingError> {
    if x.len() != n_qubits {
        return Err(EncodingError::LengthMismatch {
            expected: n_qubits,
            got: x.len(),
        });
    }
    if x.is_empty() {
        return Err(EncodingError::Empty);
    }
    let mut state = StateVector::zero(n_qubits)?;
    for (q, &v) in x.iter().enumerate() {
        state.apply(&Gate::ry(q, v))?;
    }
    Ok(state)
}

/// Closed-form fidelity between two encoded points: `Π cos²(scale·(x_i - y_i)/2)`.
pub fn encoded_fidelity(x: &[f64], y: &[f64], cfg: &EncodingConfig) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (cfg.angle_scale * (a - b) / 2.0).cos().powi(2))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn zero_feature_is_plus_state() {
        let p = encode_point(&[0.0], &EncodingConfig::default(), 0).unwrap();
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert!(close(p.state.amplitudes()[0], h));
        assert!(close(p.state.amplitudes()[1], h));
    }

    #[test]
    fn half_feature_hand_computed() {
        // RZ(π)H|0> = (e^{-iπ/2}|0> + e^{iπ/2}|1>)/√2 = (-i|0> + i|1>)/√2.
        let p = encode_point(&[0.5], &EncodingConfig::default(), 3).unwrap();
        assert_eq!(p.source_row, 3);
        assert!(close(p.state.amplitudes()[0], Complex64::new(0.0, -FRAC_1_SQRT_2)));
        assert!(close(p.state.amplitudes()[1], Complex64::new(0.0, FRAC_1_SQRT_2)));
    }

    #[test]
    fn two_features_form_tensor_product() {
        let cfg = EncodingConfig::default();
        let both = encode_point(&[0.25, 0.75], &cfg, 0).unwrap();
        let a = encode_point(&[0.25], &cfg, 0).unwrap();
        let b = encode_point(&[0.75], &cfg, 0).unwrap();
        let a = a.state.amplitudes();
        let b = b.state.amplitudes();
        for i in 0..2 {
            for j in 0..2 {
                assert!(close(both.state.amplitudes()[i * 2 + j], a[i] * b[j]));
            }
        }
    }

    #[test]
    fn default_scale_aliases_endpoints() {
        let cfg = EncodingConfig::default();
        let zero = encode_point(&[0.0], &cfg, 0).unwrap();
        let one = encode_point(&[1.0], &cfg, 1).unwrap();
        assert!((zero.state.fidelity(&one.state).unwrap() - 1.0).abs() < 1e-12);

        let pi_scale = EncodingConfig { angle_scale: PI, ..cfg };
        let zero = encode_point(&[0.0], &pi_scale, 0).unwrap();
        let one = encode_point(&[1.0], &pi_scale, 1).unwrap();
        assert!(zero.state.fidelity(&one.state).unwrap() < 1e-12);
    }

    #[test]
    fn encode_rejects_bad_input() {
        let cfg = EncodingConfig::default();
        assert_eq!(encode_point(&[], &cfg, 0), Err(EncodingError::Empty));
        assert_eq!(
            encode_point(&[0.2, 1.5], &cfg, 0),
            Err(EncodingError::OutOfRange { index: 1, value: 1.5 })
        );
        assert!(matches!(encode_point(&[f64::NAN], &cfg, 0), Err(EncodingError::OutOfRange { .. })));
        let bad = EncodingConfig { angle_scale: 0.0, ..cfg };
        assert_eq!(encode_point(&[0.2], &bad, 0), Err(EncodingError::InvalidScale(0.0)));
    }

    #[test]
    fn feature_map_is_identity_on_one_qubit() {
        let cfg = EncodingConfig::default();
        let p = encode_point(&[0.3], &cfg, 0).unwrap();
        assert_eq!(apply_feature_map(p.clone(), &cfg).unwrap(), p);
        assert!(feature_map_gates(1, &cfg).is_empty());
    }

    #[test]
    fn feature_map_gate_order() {
        let cfg = EncodingConfig::default();
        let gates = feature_map_gates(3, &cfg);
        assert_eq!(
            gates,
            vec![
                Gate::ising_xy(0, 1, FRAC_PI_2),
                Gate::cnot(0, 1),
                Gate::ising_xy(1, 2, FRAC_PI_2),
                Gate::cnot(1, 2),
            ]
        );
    }

    #[test]
    fn angle_embed_examples() {
        let s = angle_embed(&[0.0], 1).unwrap();
        assert_eq!(s.as_basis_index(1e-12), Some(0));
        let s = angle_embed(&[PI], 1).unwrap();
        assert_eq!(s.as_basis_index(1e-12), Some(1));
        let s = angle_embed(&[FRAC_PI_2], 1).unwrap();
        assert!(close(s.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert_eq!(
            angle_embed(&[0.1, 0.2], 3),
            Err(EncodingError::LengthMismatch { expected: 3, got: 2 })
        );
    }

    #[test]
    fn angle_embed_amplitudes_real_nonnegative() {
        let s = angle_embed(&[0.3, 2.9, PI, 0.0], 4).unwrap();
        for a in s.amplitudes() {
            assert!(a.im.abs() < 1e-15 && a.re >= -1e-15, "{a}");
        }
    }
}
