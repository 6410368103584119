use qknn_core::noise::{NoiseKind, NoiseSpec, Pauli};
use qknn_core::qec::{correct, encode_logical, majority_decode, measure_syndrome, residual_logical_error, RepetitionCode};
use qknn_core::qsim::{Gate, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn with_flips(bit: u8, code: &RepetitionCode, qubits: &[usize]) -> StateVector {
    let mut s = encode_logical(bit, code).unwrap();
    for &q in qubits {
        s.apply(&Gate::x(q)).unwrap();
    }
    s
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| (0..n).filter(|q| m >> q & 1 == 1).collect())
        .collect()
}

#[test]
fn every_single_flip_is_corrected_for_three_qubits() {
    let code = RepetitionCode::three();
    let mut cases = 0;
    for bit in [0u8, 1] {
        for q in 0..3 {
            let noisy = with_flips(bit, &code, &[q]);
            let s = measure_syndrome(&noisy, &code).unwrap();
            assert!(!s.is_trivial());
            let fixed = correct(noisy, &s, &code).unwrap();
            assert_eq!(fixed, encode_logical(bit, &code).unwrap());
            cases += 1;
        }
    }
    assert_eq!(cases, 6);
}

#[test]
fn every_double_flip_becomes_a_logical_error() {
    let code = RepetitionCode::three();
    for bit in [0u8, 1] {
        for pair in subsets(3, 2) {
            let noisy = with_flips(bit, &code, &pair);
            let s = measure_syndrome(&noisy, &code).unwrap();
            assert!(!s.is_trivial(), "two flips must trip a stabilizer");
            let fixed = correct(noisy, &s, &code).unwrap();
            assert_eq!(fixed, encode_logical(1 - bit, &code).unwrap(), "{pair:?}");
        }
    }
}

#[test]
fn five_qubit_code_corrects_up_to_two_flips() {
    let code = RepetitionCode::new(5).unwrap();
    for bit in [0u8, 1] {
        for weight in 0..=5 {
            for flips in subsets(5, weight) {
                let noisy = with_flips(bit, &code, &flips);
                let s = measure_syndrome(&noisy, &code).unwrap();
                let fixed = correct(noisy, &s, &code).unwrap();
                let expected = if weight <= 2 { bit } else { 1 - bit };
                assert_eq!(fixed, encode_logical(expected, &code).unwrap(), "{flips:?}");
            }
        }
    }
}

#[test]
fn majority_vote_matches_brute_force() {
    for n in [3usize, 5, 7] {
        for m in 0..1u32 << n {
            let bits: Vec<u8> = (0..n).map(|q| (m >> q & 1) as u8).collect();
            let ones = m.count_ones() as usize;
            assert_eq!(majority_decode(&bits).unwrap(), u8::from(ones > n / 2));
        }
    }
}

#[test]
fn residual_logical_flip_rate_matches_binomial_tail() {
    let code = RepetitionCode::three();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [0.05, 0.1, 0.3] {
        let spec = NoiseSpec::new(NoiseKind::BitFlip, p).unwrap();
        let shots = 200_000;
        let hits = (0..shots)
            .filter(|_| residual_logical_error(&spec, &code, &mut rng) == Some(Pauli::X))
            .count();
        let rate = hits as f64 / shots as f64;
        let want = 3.0 * p * p * (1.0 - p) + p * p * p;
        let sigma = (want * (1.0 - want) / shots as f64).sqrt();
        assert!((rate - want).abs() < 5.0 * sigma + 1e-4, "p={p}: {rate} vs {want}");
        assert!(rate < p);
    }
}

#[test]
fn phase_flips_pass_through_a_bit_flip_code() {
    let code = RepetitionCode::three();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p: f64 = 0.1;
    let spec = NoiseSpec::new(NoiseKind::PhaseFlip, p).unwrap();
    let shots = 200_000;
    let hits = (0..shots)
        .filter(|_| residual_logical_error(&spec, &code, &mut rng) == Some(Pauli::Z))
        .count();
    // odd number of Z among three qubits
    let want = 3.0 * p * (1.0 - p).powi(2) + p.powi(3);
    assert!((hits as f64 / shots as f64 - want).abs() < 0.005);
}
