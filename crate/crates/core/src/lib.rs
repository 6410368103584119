//! Quantum k-nearest-neighbours classification on a state-vector simulator,
//! with classical KNN and variational-circuit baselines, Pauli noise,
//! repetition-code mitigation and the benchmark harness.

pub mod datapipe;
pub mod encoding;
pub mod noise;
pub mod qec;
pub mod qsim;
pub mod seeding;
pub mod cknn;
pub mod qknn;
pub mod qnn;
pub mod experiment;
pub mod metrics;
