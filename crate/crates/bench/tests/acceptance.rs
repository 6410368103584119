//! One PASS/FAIL line per acceptance criterion.
//!
//! Run with `cargo test -p qknn-bench --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use qknn_core::datapipe::{chi2_critical_value, chi_square_select, Dataset, DatasetKind, SelectionPolicy};
use qknn_core::experiment::{load_kind, prepare, run_benchmark, run_noise_sweep, BenchConfig, ModelKind, SweepConfig};
use qknn_core::noise::{trajectory_density, NoiseKind, NoiseSpec, Pauli};
use qknn_core::qec::{correct, encode_logical, measure_syndrome, RepetitionCode};
use qknn_core::qknn::{fit_predict, quantum_distance, DistanceMode, QknnConfig};
use qknn_core::qnn::{accuracy, batch_loss, gradient, init_params, train, Batch, QnnArchitecture, TrainConfig};
use qknn_core::qsim::{Gate, GateKind, Matrix, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Not evaluable in this environment.
    Missing(String),
}

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load(kind: DatasetKind) -> Result<Dataset, Outcome> {
    load_kind(kind, &data_dir()).map_err(|e| Outcome::Missing(format!("data file absent ({e})")))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn bench_accuracy(d: &Dataset, kind: DatasetKind, model: ModelKind, features: usize) -> f64 {
    let cfg = BenchConfig {
        dataset: kind,
        model,
        features,
        ..Default::default()
    };
    run_benchmark(d, &cfg).unwrap().metrics.accuracy
}

fn c1_iris_qknn() -> Outcome {
    let d = match load(DatasetKind::Iris) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let (acc, t) = timed(|| bench_accuracy(&d, DatasetKind::Iris, ModelKind::Qknn, 4));
    check(acc >= 0.95 && t < Duration::from_secs(10), format!("accuracy {acc:.4} (>= 0.95), {t:.2?} (< 10 s)"))
}

fn c2_iris_cknn() -> Outcome {
    let d = match load(DatasetKind::Iris) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let acc = bench_accuracy(&d, DatasetKind::Iris, ModelKind::Cknn, 4);
    check(acc >= 0.93, format!("accuracy {acc:.4} (>= 0.93)"))
}

fn c3_banknote() -> Outcome {
    let d = match load(DatasetKind::Banknote) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let (q, t) = timed(|| bench_accuracy(&d, DatasetKind::Banknote, ModelKind::Qknn, 4));
    let c = bench_accuracy(&d, DatasetKind::Banknote, ModelKind::Cknn, 4);
    check(
        q >= 0.95 && c >= 0.95 && t < Duration::from_secs(120),
        format!("qknn {q:.4}, cknn {c:.4} (>= 0.95), qknn {t:.2?} (< 2 min)"),
    )
}

fn c4_wdbc() -> Outcome {
    let d = match load(DatasetKind::Wdbc) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let acc = bench_accuracy(&d, DatasetKind::Wdbc, ModelKind::Qknn, 4);
    check(acc >= 0.90, format!("accuracy {acc:.4} (>= 0.90)"))
}

fn c5_noise_sweep() -> Outcome {
    let d = match load(DatasetKind::Wdbc) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let cfg = SweepConfig {
        bench: BenchConfig {
            dataset: DatasetKind::Wdbc,
            ..Default::default()
        },
        ..Default::default()
    };
    let (r, t) = timed(|| run_noise_sweep(&d, &cfg).unwrap());
    let at = |p: f64| {
        let i = r.noise_levels.iter().position(|&x| (x - p).abs() < 1e-9).unwrap();
        r.mean_accuracy[i]
    };
    let (a1, a3, a6) = (at(0.1), at(0.3), at(0.6));
    check(
        a1 > a3 && a3 > a6 && r.trials == 20 && t < Duration::from_secs(900),
        format!("wdbc means p=0.1 {a1:.4} > p=0.3 {a3:.4} > p=0.6 {a6:.4}, {} trials, {t:.2?}", r.trials),
    )
}

fn c6_unitarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut kinds = vec![
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::T,
        GateKind::Cnot,
        GateKind::Swap,
        GateKind::Toffoli,
    ];
    for _ in 0..100 {
        let t = rng.random_range(-4.0 * PI..4.0 * PI);
        kinds.extend([GateKind::Rz(t), GateKind::Ry(t), GateKind::IsingXy(t)]);
    }
    let worst = kinds
        .iter()
        .map(|k| {
            let m = k.matrix();
            m.adjoint().mul(&m).max_abs_diff(&Matrix::identity(m.dim()))
        })
        .fold(0.0, f64::max);
    check(worst < 1e-10, format!("{} gates, max |U†U - I| {worst:.2e}", kinds.len()))
}

fn random_gate(n: usize, rng: &mut ChaCha8Rng) -> Gate {
    let mut q: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        q.swap(i, rng.random_range(0..=i));
    }
    let t = rng.random_range(-PI..PI);
    match rng.random_range(0..if n >= 3 { 7 } else { 6 }) {
        0 => Gate::h(q[0]),
        1 => Gate::rz(q[0], t),
        2 => Gate::ry(q[0], t),
        3 => Gate::t(q[0]),
        4 if n >= 2 => Gate::cnot(q[0], q[1]),
        5 if n >= 2 => Gate::ising_xy(q[0], q[1], t),
        6 => Gate::toffoli(q[0], q[1], q[2]),
        _ => Gate::y(q[0]),
    }
}

// Dense 2^n operator built from the gate's local matrix, qubit 0 most significant.
fn embed(gate: &Gate, n: usize) -> Matrix {
    let g = gate.kind.matrix();
    let bit = |i: usize, q: usize| (i >> (n - 1 - q)) & 1;
    let local = |i: usize| gate.targets.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
    let mut m = Matrix::zeros(1 << n);
    for r in 0..1 << n {
        for c in 0..1 << n {
            if (0..n).filter(|q| !gate.targets.contains(q)).all(|q| bit(r, q) == bit(c, q)) {
                m.set(r, c, g.get(local(r), local(c)));
            }
        }
    }
    m
}

fn c7_norm_and_dense() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut s = StateVector::zero(6).unwrap();
    let mut norm_err: f64 = 0.0;
    for _ in 0..1000 {
        s.apply(&random_gate(6, &mut rng)).unwrap();
        norm_err = norm_err.max((s.norm_sqr() - 1.0).abs());
    }
    let mut dense_err: f64 = 0.0;
    for n in 1..=4 {
        for _ in 0..10 {
            let mut s = StateVector::zero(n).unwrap();
            let mut v = s.amplitudes().to_vec();
            for _ in 0..20 {
                let g = random_gate(n, &mut rng);
                s.apply(&g).unwrap();
                v = embed(&g, n).mul_vec(&v);
            }
            let diff = s.amplitudes().iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            dense_err = dense_err.max(diff);
        }
    }
    check(
        norm_err < 1e-10 && dense_err < 1e-10,
        format!("norm drift {norm_err:.2e}, dense-oracle diff {dense_err:.2e} (n <= 4)"),
    )
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut s = StateVector::zero(n).unwrap();
    for _ in 0..3 {
        for q in 0..n {
            s.apply(&Gate::ry(q, rng.random_range(0.0..PI))).unwrap();
            s.apply(&Gate::rz(q, rng.random_range(-PI..PI))).unwrap();
        }
        for q in 1..n {
            s.apply(&Gate::cnot(q - 1, q)).unwrap();
        }
    }
    s
}

fn c8_swap_test() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = random_state(3, &mut rng);
        let b = random_state(3, &mut rng);
        let exact = 0.5 * (1.0 + a.fidelity(&b).unwrap());
        let sampled = quantum_distance(&a, &b, DistanceMode::Sampled { shots: 100_000 }, &mut rng).unwrap();
        worst = worst.max((exact - sampled).abs());
    }
    check(worst < 0.005, format!("50 pairs, max |sampled - exact| {worst:.4}"))
}

fn c9_feature_map() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    let mut missing = Vec::new();
    for kind in DatasetKind::ALL {
        let d = match load(kind) {
            Ok(d) => d,
            Err(_) => {
                missing.push(kind.to_string());
                continue;
            }
        };
        let cfg = BenchConfig {
            dataset: kind,
            ..Default::default()
        };
        let data = prepare(&d, &cfg).unwrap();
        let with = QknnConfig {
            use_feature_map: true,
            ..cfg.qknn_config()
        };
        let without = QknnConfig {
            use_feature_map: false,
            ..with
        };
        let a = fit_predict(&data.train, &data.test, with, None).unwrap().predictions;
        let b = fit_predict(&data.train, &data.test, without, None).unwrap().predictions;
        let same = a == b;
        ok &= same;
        details.push(format!("{kind} {}", if same { "identical" } else { "differs" }));
    }
    let detail = details.join(", ");
    if !missing.is_empty() {
        return Outcome::Missing(format!("{detail}; data file absent for {}", missing.join(", ")));
    }
    check(ok, detail)
}

fn kraus_oracle(kind: NoiseKind, p: f64, psi: &StateVector) -> Matrix {
    let rho = Matrix::outer(psi.amplitudes(), psi.amplitudes());
    let branches: Vec<(f64, Pauli)> = match kind {
        NoiseKind::BitFlip => vec![(p, Pauli::X)],
        NoiseKind::PhaseFlip => vec![(p, Pauli::Z)],
        NoiseKind::BitPhaseFlip => vec![(p, Pauli::Y)],
        NoiseKind::MixedPauli => vec![(p / 3.0, Pauli::X), (p / 3.0, Pauli::Y), (p / 3.0, Pauli::Z)],
    };
    branches.iter().fold(rho.scale(1.0 - p), |acc, &(w, pauli)| {
        let k = pauli.matrix();
        acc.add(&k.mul(&rho).mul(&k.adjoint()).scale(w))
    })
}

fn c10_noise_channels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for kind in [NoiseKind::BitFlip, NoiseKind::PhaseFlip, NoiseKind::BitPhaseFlip, NoiseKind::MixedPauli] {
        for p in [0.1, 0.3, 0.6] {
            let psi = random_state(1, &mut rng);
            let spec = NoiseSpec::new(kind, p).unwrap();
            let got = trajectory_density(&psi, &spec, &[0], 100_000, rng.random()).unwrap();
            worst = worst.max(got.max_abs_diff(&kraus_oracle(kind, p, &psi)));
        }
    }
    check(worst < 0.01, format!("4 channels x 3 p, 1e5 shots, max entry diff {worst:.4}"))
}

fn c11_repetition_code() -> Outcome {
    let code = RepetitionCode::three();
    let mut corrected = 0;
    let mut detected = 0;
    for bit in [0u8, 1] {
        for q in 0..3 {
            let mut s = encode_logical(bit, &code).unwrap();
            s.apply(&Gate::x(q)).unwrap();
            let syn = measure_syndrome(&s, &code).unwrap();
            if correct(s, &syn, &code).unwrap() == encode_logical(bit, &code).unwrap() {
                corrected += 1;
            }
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let mut s = encode_logical(bit, &code).unwrap();
            s.apply(&Gate::x(a)).unwrap();
            s.apply(&Gate::x(b)).unwrap();
            let syn = measure_syndrome(&s, &code).unwrap();
            if !syn.is_trivial() && correct(s, &syn, &code).unwrap() == encode_logical(1 - bit, &code).unwrap() {
                detected += 1;
            }
        }
    }
    check(
        corrected == 6 && detected == 6,
        format!("single flips corrected {corrected}/6, double flips flagged as logical errors {detected}/6"),
    )
}

fn blobs() -> Batch {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut inputs, mut labels) = (Vec::new(), Vec::new());
    for i in 0..60 {
        let y = i % 2;
        let (cx, cy) = if y == 1 { (0.6, 0.75) } else { (0.2, 0.25) };
        inputs.push(vec![(cx + rng.random_range(-0.15..0.15)) * PI, (cy + rng.random_range(-0.15..0.15)) * PI]);
        labels.push(y);
    }
    Batch { inputs, labels }
}

fn c12_qnn() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=4);
        let mut arch = QnnArchitecture::new(n, rng.random_range(1..=3), rng.random_range(2..=n)).unwrap();
        init_params(&mut arch, PI, rng.random());
        let batch = Batch {
            inputs: (0..6).map(|_| (0..n).map(|_| rng.random_range(0.0..PI)).collect()).collect(),
            labels: (0..6).map(|i| i % arch.n_classes).collect(),
        };
        let g = gradient(&arch, &batch).unwrap();
        for l in 0..arch.n_layers {
            for q in 0..n {
                let (mut plus, mut minus) = (arch.clone(), arch.clone());
                plus.params[l][q] += h;
                minus.params[l][q] -= h;
                let fd = (batch_loss(&plus, &batch).unwrap() - batch_loss(&minus, &batch).unwrap()) / (2.0 * h);
                worst = worst.max((g[l][q] - fd).abs() / fd.abs().max(1.0));
            }
        }
    }
    let batch = blobs();
    let mut arch = QnnArchitecture::new(2, 2, 2).unwrap();
    init_params(&mut arch, 0.01, 12);
    let trained = train(arch, &batch, &TrainConfig::default()).unwrap();
    let acc = accuracy(&trained.arch, &batch).unwrap();
    check(
        worst < 1e-4 && acc >= 0.9,
        format!("max shift/FD diff {worst:.2e} (relative above |g| = 1), blob training accuracy {acc:.3}"),
    )
}

fn c13_chi_square() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rows = rng.random_range(20..80);
        let bins = rng.random_range(2..=10);
        let values: Vec<f64> = (0..rows).map(|_| rng.random_range(0.0..1.0)).collect();
        let labels: Vec<usize> = (0..rows).map(|i| if i < 3 { i } else { rng.random_range(0..3) }).collect();
        let d = Dataset::new(
            "t",
            values.iter().map(|&v| vec![v]).collect(),
            labels.clone(),
            vec!["f".into()],
            vec!["a".into(), "b".into(), "c".into()],
        )
        .unwrap();
        let got = chi_square_select(&d, bins, SelectionPolicy::TopK(1)).unwrap().chi2_scores[0];
        // brute force: count each cell directly, sum (O - E)² / E over nonempty margins
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let bin_of = |v: f64| (((v - lo) / (hi - lo) * bins as f64).floor() as usize).min(bins - 1);
        let count = |b: usize, c: usize| values.iter().zip(&labels).filter(|&(&v, &l)| bin_of(v) == b && l == c).count() as f64;
        let row = |b: usize| (0..3).map(|c| count(b, c)).sum::<f64>();
        let col = |c: usize| (0..bins).map(|b| count(b, c)).sum::<f64>();
        let mut want = 0.0;
        for b in (0..bins).filter(|&b| row(b) > 0.0) {
            for c in 0..3 {
                let e = row(b) * col(c) / rows as f64;
                want += (count(b, c) - e).powi(2) / e;
            }
        }
        worst = worst.max((got - want).abs());
    }
    let crit = chi2_critical_value(0.05, 1.0);
    check(
        worst < 1e-9 && (crit - 3.841).abs() < 1e-3,
        format!("max oracle diff {worst:.2e}, critical value (0.05, 1) = {crit:.4}"),
    )
}

fn bench(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bench")).args(args).output().unwrap()
}

fn c14_determinism() -> Outcome {
    if let Err(o) = load(DatasetKind::Iris) {
        return o;
    }
    let dir = tempfile::tempdir().unwrap();
    let data = data_dir();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let path = |p: &Path| p.to_str().unwrap().to_string();
    let mut identical = Vec::new();
    for model in ["qknn", "cknn", "qnn"] {
        let out = bench(&[
            "run", "--dataset", "iris", "--model", model, "--seed", "7", "--data-dir", &path(&data), "--out", &path(&first),
        ]);
        if !out.status.success() {
            return Outcome::Fail(format!("{model}: first run failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        // replay from the config recorded in the report
        let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&first).unwrap()).unwrap();
        let c = &report["config"];
        let replay_cfg = serde_json::json!({
            "dataset": c["dataset"], "model": c["model"], "k": c["k"], "seed": c["seed"],
            "features": c["features"], "angle_scale": c["angle_scale"], "feature_map": c["feature_map"],
            "test_fraction": c["test_fraction"], "bins": c["bins"],
            "qnn_layers": c["qnn"]["layers"], "qnn_epochs": c["qnn"]["epochs"],
            "qnn_learning_rate": c["qnn"]["learning_rate"],
            "data_dir": path(&data), "out": path(&second),
        });
        let cfg_path = dir.path().join("replay.json");
        std::fs::write(&cfg_path, replay_cfg.to_string()).unwrap();
        let out = bench(&["run", "--config", &path(&cfg_path)]);
        if !out.status.success() {
            return Outcome::Fail(format!("{model}: replay failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        identical.push((model, std::fs::read(&first).unwrap() == std::fs::read(&second).unwrap()));
    }
    let ok = identical.iter().all(|(_, same)| *same);
    let detail = identical
        .iter()
        .map(|(m, same)| format!("{m} {}", if *same { "byte-identical" } else { "differs" }))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, detail)
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("iris qknn accuracy and runtime", c1_iris_qknn),
        ("iris cknn accuracy", c2_iris_cknn),
        ("banknote qknn/cknn accuracy and runtime", c3_banknote),
        ("wdbc qknn top-4 accuracy", c4_wdbc),
        ("noise sweep ordering", c5_noise_sweep),
        ("gate unitarity", c6_unitarity),
        ("norm preservation and dense oracle", c7_norm_and_dense),
        ("sampled swap test", c8_swap_test),
        ("feature-map invariance", c9_feature_map),
        ("noise channels vs Kraus oracle", c10_noise_channels),
        ("repetition code", c11_repetition_code),
        ("qnn gradients and training", c12_qnn),
        ("chi-square oracle and critical value", c13_chi_square),
        ("bench run replay determinism", c14_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        match f() {
            Outcome::Pass(d) => println!("criterion {n:>2} PASS  {name}: {d}"),
            Outcome::Fail(d) => {
                println!("criterion {n:>2} FAIL  {name}: {d}");
                failed.push(n);
            }
            Outcome::Missing(d) => println!("criterion {n:>2} FAIL  {name}: not evaluated, {d}"),
        }
    }
    assert!(failed.is_empty(), "criteria failed: {failed:?}");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bench(args).status.code();
    let data = data_dir();
    let data = data.to_str().unwrap();
    assert_eq!(code(&["run", "--dataset", "mnist"]), Some(2));
    assert_eq!(code(&["run", "--k", "three"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().to_str().unwrap();
    assert_eq!(code(&["run", "--dataset", "iris", "--data-dir", empty]), Some(1));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"colour": "blue"}"#).unwrap();
    assert_eq!(code(&["run", "--config", bad.to_str().unwrap()]), Some(2));
    if load(DatasetKind::Iris).is_ok() {
        assert_eq!(code(&["run", "--dataset", "iris", "--k", "0", "--data-dir", data]), Some(2));
        assert_eq!(code(&["select", "--dataset", "iris", "--policy", "topk=2", "--data-dir", data]), Some(0));
    }
}
