use std::path::PathBuf;

use qknn_core::datapipe::{Dataset, DatasetKind};
use qknn_core::experiment::{load_kind, replay, run_benchmark, run_noise_sweep, BenchConfig, ModelKind, SweepConfig};
use qknn_core::noise::NoiseKind;
use qknn_core::qknn::Mitigation;

fn dataset(kind: DatasetKind) -> Option<Dataset> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    load_kind(kind, &dir).map_err(|e| eprintln!("skipping {kind}: {e}")).ok()
}

fn sweep(kind: DatasetKind, noise_kind: NoiseKind, mitigation: Mitigation, p_values: Vec<f64>, trials: usize) -> qknn_core::experiment::SweepResult {
    let d = dataset(kind).unwrap();
    let cfg = SweepConfig {
        bench: BenchConfig {
            dataset: kind,
            ..Default::default()
        },
        p_values,
        trials,
        mitigation,
        noise_kind,
        ..Default::default()
    };
    run_noise_sweep(&d, &cfg).unwrap()
}

#[test]
fn zero_noise_reproduces_the_noiseless_run() {
    if dataset(DatasetKind::Iris).is_none() {
        return;
    }
    for m in [Mitigation::None, Mitigation::RepeatVote(3), Mitigation::PhysicalCode(3)] {
        let r = sweep(DatasetKind::Iris, NoiseKind::MixedPauli, m, vec![0.0], 4);
        assert!(r.accuracies[0].iter().all(|&a| a == r.noiseless_accuracy), "{m}");
        assert_eq!(r.mean_accuracy[0], r.noiseless_accuracy);
        assert_eq!(r.std_accuracy[0], 0.0);
    }
}

#[test]
fn accuracy_falls_with_noise() {
    if dataset(DatasetKind::Wdbc).is_none() {
        return;
    }
    let r = sweep(DatasetKind::Wdbc, NoiseKind::MixedPauli, Mitigation::None, vec![0.0, 0.2, 0.4, 0.6], 10);
    // adjacent levels may wobble by sampling error; the ends must not
    for w in r.mean_accuracy.windows(2) {
        assert!(w[1] <= w[0] + 0.03, "{:?}", r.mean_accuracy);
    }
    assert!(r.mean_accuracy[3] < r.mean_accuracy[0] - 0.1);
}

#[test]
fn repeat_vote_helps_at_low_noise() {
    if dataset(DatasetKind::Wdbc).is_none() {
        return;
    }
    let none = sweep(DatasetKind::Wdbc, NoiseKind::MixedPauli, Mitigation::None, vec![0.1], 20);
    let vote = sweep(DatasetKind::Wdbc, NoiseKind::MixedPauli, Mitigation::RepeatVote(3), vec![0.1], 20);
    assert!(vote.mean_accuracy[0] >= none.mean_accuracy[0] - none.std_accuracy[0]);
}

#[test]
fn physical_code_helps_against_bit_flips() {
    if dataset(DatasetKind::Wdbc).is_none() {
        return;
    }
    let none = sweep(DatasetKind::Wdbc, NoiseKind::BitFlip, Mitigation::None, vec![0.1], 20);
    let code = sweep(DatasetKind::Wdbc, NoiseKind::BitFlip, Mitigation::PhysicalCode(3), vec![0.1], 20);
    assert!(code.mean_accuracy[0] >= none.mean_accuracy[0]);
}

#[test]
fn sweeps_are_deterministic() {
    if dataset(DatasetKind::Iris).is_none() {
        return;
    }
    let a = sweep(DatasetKind::Iris, NoiseKind::MixedPauli, Mitigation::None, vec![0.2, 0.4], 3);
    let b = sweep(DatasetKind::Iris, NoiseKind::MixedPauli, Mitigation::None, vec![0.2, 0.4], 3);
    assert_eq!(a, b);
}

#[test]
fn reports_replay_exactly() {
    let Some(d) = dataset(DatasetKind::Iris) else { return };
    for model in ModelKind::ALL {
        let cfg = BenchConfig {
            model,
            qnn: qknn_core::experiment::QnnSettings {
                epochs: 5,
                ..Default::default()
            },
            ..Default::default()
        };
        let report = run_benchmark(&d, &cfg).unwrap();
        let again = replay(&d, &report).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap(),
            "{model}"
        );
    }
}

#[test]
fn invalid_configs_fail_at_the_config_stage() {
    let Some(d) = dataset(DatasetKind::Iris) else { return };
    let cfg = BenchConfig { k: 0, ..Default::default() };
    let err = run_benchmark(&d, &cfg).unwrap_err();
    assert_eq!(err.stage, qknn_core::experiment::Stage::Config);
}
