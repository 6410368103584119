//! End-to-end benchmark runs, model comparison and noise sweeps.
//!
//! Pipeline: load → stratified split → min-max scaling fitted on the train
//! rows → χ² top-k selection on the scaled train rows → model → metrics.
//! Reports carry everything needed to replay a run: the full config, split
//! indices, scaler parameters and the selected features.

use std::f64::consts::TAU;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cknn;
use crate::datapipe::{
    chi_square_select, load_dataset, stratified_split, Dataset, DatasetKind, MinMaxScaler, SelectionPolicy, SelectionResult,
    SplitIndices,
};
use crate::encoding::EncodingConfig;
use crate::metrics::{compute_metrics, mean_std, EvalReport};
use crate::noise::{NoiseKind, NoiseSpec};
use crate::qknn::{self, trial_seed, DistanceMode, Injection, Mitigation, NoiseConfig, QknnConfig};
use crate::qnn::{self, Batch, Entangler, LayerRotation, QnnArchitecture, TrainConfig};
use crate::seeding::derive_seed;

/// Environment variable naming the directory with the UCI files.
pub const DATA_DIR_ENV: &str = "QKNN_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Split,
    Normalize,
    Select,
    Model,
    Metrics,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Split => "split",
            Stage::Normalize => "normalize",
            Stage::Select => "select",
            Stage::Model => "model",
            Stage::Metrics => "metrics",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage: {message}")]
pub struct BenchError {
    pub stage: Stage,
    pub message: String,
}

impl BenchError {
    pub fn new(stage: Stage, err: impl fmt::Display) -> Self {
        Self {
            stage,
            message: err.to_string(),
        }
    }
}

fn at<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> BenchError {
    move |e| BenchError::new(stage, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Qknn,
    Cknn,
    Qnn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Qknn, ModelKind::Cknn, ModelKind::Qnn];
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Qknn => "qknn",
            ModelKind::Cknn => "cknn",
            ModelKind::Qnn => "qnn",
        })
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qknn" => Ok(ModelKind::Qknn),
            "cknn" => Ok(ModelKind::Cknn),
            "qnn" => Ok(ModelKind::Qnn),
            _ => Err(format!("unknown model '{s}' (qknn, cknn, qnn)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QnnSettings {
    pub layers: usize,
    pub rotation: LayerRotation,
    pub entangler: Entangler,
    pub learning_rate: f64,
    pub epochs: usize,
    pub init_scale: f64,
}

impl Default for QnnSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            layers: 2,
            rotation: LayerRotation::default(),
            entangler: Entangler::default(),
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            init_scale: t.init_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub dataset: DatasetKind,
    pub model: ModelKind,
    pub k: usize,
    pub seed: u64,
    /// Number of χ²-ranked features kept.
    pub features: usize,
    pub angle_scale: f64,
    pub feature_map: bool,
    pub distance: DistanceMode,
    pub test_fraction: f64,
    pub bins: usize,
    pub qnn: QnnSettings,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Iris,
            model: ModelKind::Qknn,
            k: 3,
            seed: 42,
            features: 4,
            angle_scale: TAU,
            feature_map: true,
            distance: DistanceMode::Exact,
            test_fraction: 0.2,
            bins: 10,
            qnn: QnnSettings::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::new(Stage::Config, m));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.features == 0 {
            return bad("features must be at least 1");
        }
        if !(self.angle_scale.is_finite() && self.angle_scale > 0.0) {
            return bad("angle scale must be positive and finite");
        }
        if let DistanceMode::Sampled { shots: 0 } = self.distance {
            return bad("shots must be at least 1");
        }
        if self.qnn.layers == 0 {
            return bad("qnn layers must be at least 1");
        }
        Ok(())
    }

    pub fn qknn_config(&self) -> QknnConfig {
        QknnConfig {
            k: self.k,
            encoding: EncodingConfig {
                angle_scale: self.angle_scale,
                ..EncodingConfig::default()
            },
            use_feature_map: self.feature_map,
            distance: self.distance,
            seed: derive_seed(self.seed, 1),
        }
    }
}

/// Directory holding the UCI files: `$QKNN_DATA_DIR` or `./data`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

pub fn load_kind(kind: DatasetKind, data_dir: &Path) -> Result<Dataset, BenchError> {
    load_dataset(&kind.default_path(data_dir), kind).map_err(at(Stage::Load))
}

/// Split, scaled and feature-selected data plus the fitted transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prepared {
    pub train: Dataset,
    pub test: Dataset,
    pub split: SplitIndices,
    pub scaler: MinMaxScaler,
    pub selection: SelectionResult,
    /// Selected columns as indices into the original feature list.
    pub kept_features: Vec<usize>,
}

pub fn prepare(dataset: &Dataset, cfg: &BenchConfig) -> Result<Prepared, BenchError> {
    let (_, _, split) = stratified_split(dataset, cfg.test_fraction, cfg.seed).map_err(at(Stage::Split))?;
    let scaler = MinMaxScaler::fit(dataset, &split.train).map_err(at(Stage::Normalize))?;
    let scaled = scaler.transform(dataset);
    let scaled_train = scaled.subset(&split.train);
    let selection = chi_square_select(&scaled_train, cfg.bins, SelectionPolicy::TopK(cfg.features))
        .map_err(at(Stage::Select))?;
    let kept_features = selection.kept_indices.iter().map(|&c| scaler.kept[c]).collect();
    let selected = scaled.select_features(&selection.kept_indices);
    Ok(Prepared {
        train: selected.subset(&split.train),
        test: selected.subset(&split.test),
        split,
        scaler,
        selection,
        kept_features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnTrace {
    pub arch: QnnArchitecture,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub dataset_rows: usize,
    pub split: SplitIndices,
    pub scaler: MinMaxScaler,
    pub selection: SelectionResult,
    pub kept_features: Vec<usize>,
    pub kept_feature_names: Vec<String>,
    pub truth: Vec<usize>,
    pub predictions: Vec<usize>,
    pub scores: Vec<Vec<f64>>,
    pub metrics: EvalReport,
    pub qnn: Option<QnnTrace>,
}

struct ModelOutput {
    predictions: Vec<usize>,
    scores: Vec<Vec<f64>>,
    qnn: Option<QnnTrace>,
}

fn run_model(model: ModelKind, data: &Prepared, cfg: &BenchConfig) -> Result<ModelOutput, BenchError> {
    match model {
        ModelKind::Qknn => {
            let out = qknn::fit_predict(&data.train, &data.test, cfg.qknn_config(), None).map_err(at(Stage::Model))?;
            Ok(ModelOutput {
                predictions: out.predictions,
                scores: out.scores,
                qnn: None,
            })
        }
        ModelKind::Cknn => {
            let preds = cknn::fit_predict(&data.train, &data.test, cfg.k).map_err(at(Stage::Model))?;
            Ok(ModelOutput {
                predictions: preds.iter().map(|p| p.label).collect(),
                scores: preds.into_iter().map(|p| p.scores).collect(),
                qnn: None,
            })
        }
        ModelKind::Qnn => {
            let s = &cfg.qnn;
            let mut arch = QnnArchitecture::new(data.train.num_features(), s.layers, data.train.num_classes()).map_err(at(Stage::Model))?;
            arch.rotation = s.rotation;
            arch.entangler = s.entangler;
            let train_cfg = TrainConfig {
                learning_rate: s.learning_rate,
                epochs: s.epochs,
                seed: derive_seed(cfg.seed, 2),
                init_scale: s.init_scale,
            };
            qnn::init_params(&mut arch, train_cfg.init_scale, train_cfg.seed);
            let outcome = qnn::train(arch, &Batch::from_normalized(&data.train), &train_cfg).map_err(at(Stage::Model))?;
            let test = Batch::from_normalized(&data.test);
            let scores = test
                .inputs
                .iter()
                .map(|x| outcome.arch.predict_proba(x))
                .collect::<Result<Vec<_>, _>>()
                .map_err(at(Stage::Model))?;
            let predictions = scores
                .iter()
                .map(|s| {
                    s.iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                        .0
                })
                .collect();
            Ok(ModelOutput {
                predictions,
                scores,
                qnn: Some(QnnTrace {
                    arch: outcome.arch,
                    loss_history: outcome.loss_history,
                }),
            })
        }
    }
}

fn report_for(dataset: &Dataset, data: &Prepared, cfg: &BenchConfig, out: ModelOutput) -> Result<BenchReport, BenchError> {
    let metrics = compute_metrics(&data.test.labels, &out.predictions, &out.scores, dataset.num_classes())
        .map_err(at(Stage::Metrics))?;
    Ok(BenchReport {
        config: *cfg,
        dataset_rows: dataset.len(),
        split: data.split.clone(),
        scaler: data.scaler.clone(),
        selection: data.selection.clone(),
        kept_feature_names: data.kept_features.iter().map(|&c| dataset.feature_names[c].clone()).collect(),
        kept_features: data.kept_features.clone(),
        truth: data.test.labels.clone(),
        predictions: out.predictions,
        scores: out.scores,
        metrics,
        qnn: out.qnn,
    })
}

/// One classifier on one dataset. Deterministic for a fixed config.
pub fn run_benchmark(dataset: &Dataset, cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let data = prepare(dataset, cfg)?;
    let out = run_model(cfg.model, &data, cfg)?;
    report_for(dataset, &data, cfg, out)
}

/// Re-runs a recorded report's config.
pub fn replay(dataset: &Dataset, report: &BenchReport) -> Result<BenchReport, BenchError> {
    run_benchmark(dataset, &report.config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub dataset: DatasetKind,
    pub seed: u64,
    pub k: usize,
    pub features: usize,
    pub qknn_accuracy: f64,
    pub cknn_accuracy: f64,
    pub qnn_accuracy: f64,
    pub qknn_f1: f64,
    pub cknn_f1: f64,
    pub qnn_f1: f64,
    pub qknn_auc: f64,
    pub cknn_auc: f64,
    pub qnn_auc: f64,
}

/// All three models on one shared split.
pub fn run_compare(dataset: &Dataset, cfg: &BenchConfig) -> Result<(CompareRow, Vec<BenchReport>), BenchError> {
    cfg.validate()?;
    let data = prepare(dataset, cfg)?;
    let reports = ModelKind::ALL
        .iter()
        .map(|&model| {
            let c = BenchConfig { model, ..*cfg };
            let out = run_model(model, &data, &c)?;
            report_for(dataset, &data, &c, out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = |i: usize| &reports[i].metrics;
    let row = CompareRow {
        dataset: cfg.dataset,
        seed: cfg.seed,
        k: cfg.k,
        features: data.kept_features.len(),
        qknn_accuracy: m(0).accuracy,
        cknn_accuracy: m(1).accuracy,
        qnn_accuracy: m(2).accuracy,
        qknn_f1: m(0).macro_f1,
        cknn_f1: m(1).macro_f1,
        qnn_f1: m(2).macro_f1,
        qknn_auc: m(0).auc,
        cknn_auc: m(1).auc,
        qnn_auc: m(2).auc,
    };
    Ok((row, reports))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub bench: BenchConfig,
    pub p_values: Vec<f64>,
    pub trials: usize,
    pub mitigation: Mitigation,
    pub noise_kind: NoiseKind,
    pub injection: Injection,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            bench: BenchConfig::default(),
            p_values: p_grid(0.0, 0.6, 0.1).unwrap_or_default(),
            trials: 20,
            mitigation: Mitigation::None,
            noise_kind: NoiseKind::MixedPauli,
            injection: Injection::AfterFeatureMap,
        }
    }
}

/// `start, start + step, …` up to `stop` inclusive, rounded to 12 decimals.
pub fn p_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, BenchError> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(BenchError::new(Stage::Config, "need step > 0 and start <= stop"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub noise_levels: Vec<f64>,
    pub mean_accuracy: Vec<f64>,
    pub std_accuracy: Vec<f64>,
    /// `accuracies[level][trial]`.
    pub accuracies: Vec<Vec<f64>>,
    pub trial_seeds: Vec<u64>,
    pub trials: usize,
    pub mitigation: Mitigation,
    pub noiseless_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dataset: DatasetKind,
    pub mitigation: String,
    pub noise_kind: String,
    pub p: f64,
    pub trials: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.noise_levels
            .iter()
            .enumerate()
            .map(|(i, &p)| SweepRow {
                dataset: self.config.bench.dataset,
                mitigation: self.mitigation.to_string(),
                noise_kind: self.config.noise_kind.to_string(),
                p,
                trials: self.trials,
                mean_accuracy: self.mean_accuracy[i],
                std_accuracy: self.std_accuracy[i],
                min_accuracy: self.accuracies[i].iter().cloned().fold(f64::INFINITY, f64::min),
                max_accuracy: self.accuracies[i].iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            })
            .collect()
    }
}

/// QKNN accuracy under Pauli noise for every `p`, averaged over seeded
/// trials. Trial `t` uses the same noise seed at every `p`, so levels are
/// compared on paired trajectories.
pub fn run_noise_sweep(dataset: &Dataset, cfg: &SweepConfig) -> Result<SweepResult, BenchError> {
    cfg.bench.validate()?;
    if cfg.trials == 0 {
        return Err(BenchError::new(Stage::Config, "trials must be at least 1"));
    }
    if cfg.p_values.is_empty() {
        return Err(BenchError::new(Stage::Config, "no noise levels"));
    }
    let specs = cfg
        .p_values
        .iter()
        .map(|&p| NoiseSpec::new(cfg.noise_kind, p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(at(Stage::Config))?;
    let data = prepare(dataset, &cfg.bench)?;
    let qcfg = cfg.bench.qknn_config();
    let accuracy = |preds: &[usize]| {
        preds.iter().zip(&data.test.labels).filter(|(p, t)| p == t).count() as f64 / preds.len() as f64
    };
    let noiseless = qknn::fit_predict(&data.train, &data.test, qcfg, None).map_err(at(Stage::Model))?;
    let trial_seeds: Vec<u64> = (0..cfg.trials as u64).map(|t| trial_seed(cfg.bench.seed, t)).collect();
    let jobs: Vec<(usize, usize)> = (0..specs.len()).flat_map(|l| (0..cfg.trials).map(move |t| (l, t))).collect();
    let flat = jobs
        .par_iter()
        .map(|&(l, t)| {
            let noise = NoiseConfig {
                spec: specs[l],
                injection: cfg.injection,
                mitigation: cfg.mitigation,
                seed: trial_seeds[t],
            };
            qknn::fit_predict(&data.train, &data.test, qcfg, Some(noise))
                .map(|o| accuracy(&o.predictions))
                .map_err(at(Stage::Model))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let accuracies: Vec<Vec<f64>> = flat.chunks(cfg.trials).map(|c| c.to_vec()).collect();
    let (mean_accuracy, std_accuracy) = accuracies.iter().map(|a| mean_std(a)).unzip();
    Ok(SweepResult {
        config: cfg.clone(),
        noise_levels: cfg.p_values.clone(),
        mean_accuracy,
        std_accuracy,
        accuracies,
        trial_seeds,
        trials: cfg.trials,
        mitigation: cfg.mitigation,
        noiseless_accuracy: accuracy(&noiseless.predictions),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(value).map_err(at(Stage::Output))?;
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(at(Stage::Output))?;
    }
    fs::write(path, text + "\n").map_err(at(Stage::Output))
}

pub fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BenchError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(at(Stage::Output))?;
    }
    let file = fs::File::create(path).map_err(at(Stage::Output))?;
    write_csv_to(file, rows)
}

pub fn write_csv_to<T: Serialize, W: std::io::Write>(writer: W, rows: &[T]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row).map_err(at(Stage::Output))?;
    }
    w.flush().map_err(at(Stage::Output))
}
