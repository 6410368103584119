//! `bench`: run, sweep, compare and select on the UCI benchmarks.

mod config;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::FileConfig;
use qknn_core::datapipe::{chi_square_select, min_max_normalize, SelectionResult};
use qknn_core::experiment::{
    default_data_dir, load_kind, Stage, run_benchmark, run_compare, run_noise_sweep, write_csv_rows, write_csv_to, write_json, BenchError,
};

#[derive(Parser)]
#[command(name = "bench", version, about = "Quantum KNN benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one classifier, writing a JSON report.
    Run(RunArgs),
    /// QKNN accuracy across noise levels, written as CSV.
    Sweep(SweepArgs),
    /// QKNN, CKNN and QNN on one shared split, written as a CSV row.
    Compare(CompareArgs),
    /// Chi-square feature ranking for a dataset.
    Select(SelectArgs),
}

#[derive(Args, Default)]
struct Common {
    /// JSON file with defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory holding the UCI files (default: $QKNN_DATA_DIR or ./data).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_parser = ["wdbc", "iris", "banknote"])]
    dataset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct ModelArgs {
    #[arg(long)]
    k: Option<usize>,
    /// Number of chi-square ranked features kept.
    #[arg(long)]
    features: Option<usize>,
    #[arg(long)]
    angle_scale: Option<f64>,
    #[arg(long, value_parser = ["exact", "sampled"])]
    distance: Option<String>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    feature_map: Option<bool>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    qnn_layers: Option<usize>,
    #[arg(long)]
    qnn_epochs: Option<usize>,
    #[arg(long)]
    qnn_learning_rate: Option<f64>,
    #[arg(long, value_parser = ["ry", "rz"])]
    qnn_rotation: Option<String>,
    #[arg(long, value_parser = ["ring", "open"])]
    qnn_entangler: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = ["qknn", "cknn", "qnn"])]
    model: Option<String>,
    #[command(flatten)]
    model_args: ModelArgs,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    p_start: Option<f64>,
    #[arg(long)]
    p_stop: Option<f64>,
    #[arg(long)]
    p_step: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_parser = ["none", "repeat-vote", "physical-code"])]
    mitigate: Option<String>,
    #[arg(long, value_parser = ["bit_flip", "phase_flip", "bit_phase_flip", "mixed_pauli"])]
    noise_kind: Option<String>,
    #[arg(long, value_parser = ["after-encoding", "after-feature-map", "both"])]
    injection: Option<String>,
    #[command(flatten)]
    model_args: ModelArgs,
    /// CSV path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model_args: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    bins: Option<usize>,
    /// alpha=F or topk=K
    #[arg(long)]
    policy: Option<String>,
}

enum Failure {
    Usage(String),
    Stage(BenchError),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure::Stage(e)
    }
}

fn usage(e: String) -> Failure {
    Failure::Usage(e)
}

fn flags(common: &Common, model: &ModelArgs) -> FileConfig {
    FileConfig {
        dataset: common.dataset.clone(),
        seed: common.seed,
        data_dir: common.data_dir.clone(),
        k: model.k,
        features: model.features,
        angle_scale: model.angle_scale,
        distance: model.distance.clone(),
        shots: model.shots,
        feature_map: model.feature_map,
        test_fraction: model.test_fraction,
        bins: model.bins,
        qnn_layers: model.qnn_layers,
        qnn_epochs: model.qnn_epochs,
        qnn_learning_rate: model.qnn_learning_rate,
        qnn_rotation: model.qnn_rotation.clone(),
        qnn_entangler: model.qnn_entangler.clone(),
        ..Default::default()
    }
}

fn resolve(common: &Common, flags: FileConfig) -> Result<FileConfig, Failure> {
    let file = match &common.config {
        Some(path) => FileConfig::load(path).map_err(usage)?,
        None => FileConfig::default(),
    };
    Ok(config::merge(flags, file))
}

fn data_dir(c: &FileConfig) -> PathBuf {
    c.data_dir.clone().unwrap_or_else(default_data_dir)
}

fn ignore_broken_pipe(e: io::Error) -> io::Result<()> {
    if e.kind() == io::ErrorKind::BrokenPipe {
        Ok(())
    } else {
        Err(e)
    }
}

fn emit_json<T: Serialize>(out: Option<&PathBuf>, value: &T) -> Result<(), Failure> {
    match out {
        Some(path) => write_json(path, value)?,
        None => {
            let text = serde_json::to_string_pretty(value).map_err(|e| BenchError::new(Stage::Output, e))?;
            let mut out = io::stdout().lock();
            writeln!(out, "{text}").or_else(ignore_broken_pipe).map_err(|e| BenchError::new(Stage::Output, e))?;
        }
    }
    Ok(())
}

fn emit_csv<T: Serialize>(out: Option<&PathBuf>, rows: &[T]) -> Result<(), Failure> {
    match out {
        Some(path) => write_csv_rows(path, rows)?,
        None => match write_csv_to(io::stdout().lock(), rows) {
            Err(e) if e.message.contains("Broken pipe") => {}
            other => other?,
        },
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut f = flags(&args.common, &args.model_args);
    f.model = args.model;
    f.out = args.out;
    let c = resolve(&args.common, f)?;
    let cfg = config::bench_config(&c).map_err(usage)?;
    let dataset = load_kind(cfg.dataset, &data_dir(&c))?;
    let start = Instant::now();
    let report = run_benchmark(&dataset, &cfg)?;
    eprintln!(
        "{} {} accuracy={:.4} f1={:.4} auc={:.4} ({:.2?})",
        cfg.dataset,
        cfg.model,
        report.metrics.accuracy,
        report.metrics.macro_f1,
        report.metrics.auc,
        start.elapsed()
    );
    emit_json(c.out.as_ref(), &report)
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut f = flags(&args.common, &args.model_args);
    f.p_start = args.p_start;
    f.p_stop = args.p_stop;
    f.p_step = args.p_step;
    f.trials = args.trials;
    f.mitigate = args.mitigate;
    f.noise_kind = args.noise_kind;
    f.injection = args.injection;
    f.out = args.out;
    let c = resolve(&args.common, f)?;
    let cfg = config::sweep_config(&c).map_err(usage)?;
    let dataset = load_kind(cfg.bench.dataset, &data_dir(&c))?;
    let start = Instant::now();
    let result = run_noise_sweep(&dataset, &cfg)?;
    for row in result.rows() {
        eprintln!("p={:.3} mean={:.4} std={:.4}", row.p, row.mean_accuracy, row.std_accuracy);
    }
    eprintln!("{} levels x {} trials in {:.2?}", result.noise_levels.len(), result.trials, start.elapsed());
    emit_csv(c.out.as_ref(), &result.rows())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let mut f = flags(&args.common, &args.model_args);
    f.out = args.out;
    let c = resolve(&args.common, f)?;
    let cfg = config::bench_config(&c).map_err(usage)?;
    let dataset = load_kind(cfg.dataset, &data_dir(&c))?;
    let (row, _) = run_compare(&dataset, &cfg)?;
    eprintln!(
        "{}: qknn={:.4} cknn={:.4} qnn={:.4}",
        row.dataset, row.qknn_accuracy, row.cknn_accuracy, row.qnn_accuracy
    );
    emit_csv(c.out.as_ref(), &[row])
}

#[derive(Serialize)]
struct SelectOutput {
    dataset: String,
    bins: usize,
    policy: String,
    kept_feature_names: Vec<String>,
    result: SelectionResult,
}

fn select(args: SelectArgs) -> Result<(), Failure> {
    let f = FileConfig {
        dataset: args.common.dataset.clone(),
        seed: args.common.seed,
        data_dir: args.common.data_dir.clone(),
        bins: args.bins,
        policy: args.policy,
        ..Default::default()
    };
    let c = resolve(&args.common, f)?;
    let (kind, bins, policy) = config::selection(&c).map_err(usage)?;
    let dataset = load_kind(kind, &data_dir(&c))?;
    let stage = |s| move |e| BenchError::new(s, e);
    let all: Vec<usize> = (0..dataset.len()).collect();
    let (scaled, scaler) = min_max_normalize(&dataset, &all).map_err(stage(Stage::Normalize))?;
    let result = chi_square_select(&scaled, bins, policy).map_err(stage(Stage::Select))?;
    let out = SelectOutput {
        dataset: kind.to_string(),
        bins,
        policy: policy.to_string(),
        kept_feature_names: result
            .kept_indices
            .iter()
            .map(|&i| dataset.feature_names[scaler.kept[i]].clone())
            .collect(),
        result,
    };
    emit_json(None, &out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Select(a) => select(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Stage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
