//! JSON config files and flag merging. Keys are the long flag names with
//! `-` replaced by `_`; a flag given on the command line wins over the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use qknn_core::datapipe::{DatasetKind, SelectionPolicy};
use qknn_core::experiment::{p_grid, BenchConfig, ModelKind, SweepConfig};
use qknn_core::noise::NoiseKind;
use qknn_core::qknn::{DistanceMode, Injection, Mitigation};
use qknn_core::qnn::{Entangler, LayerRotation};

pub const DEFAULT_SHOTS: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<String>,
    pub model: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub features: Option<usize>,
    pub angle_scale: Option<f64>,
    pub distance: Option<String>,
    pub shots: Option<usize>,
    pub feature_map: Option<bool>,
    pub test_fraction: Option<f64>,
    pub bins: Option<usize>,
    pub policy: Option<String>,
    pub p_start: Option<f64>,
    pub p_stop: Option<f64>,
    pub p_step: Option<f64>,
    pub trials: Option<usize>,
    pub mitigate: Option<String>,
    pub noise_kind: Option<String>,
    pub injection: Option<String>,
    pub qnn_layers: Option<usize>,
    pub qnn_epochs: Option<usize>,
    pub qnn_learning_rate: Option<f64>,
    pub qnn_rotation: Option<String>,
    pub qnn_entangler: Option<String>,
    pub data_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }
}

fn parse<T: FromStr>(key: &str, value: Option<String>) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    value.map(|v| v.parse::<T>().map_err(|e| format!("invalid {key} '{v}': {e}"))).transpose()
}

/// `flag` if given, otherwise `file`.
pub fn merge(flags: FileConfig, file: FileConfig) -> FileConfig {
    macro_rules! pick {
        ($($f:ident),*) => {
            FileConfig { $($f: flags.$f.or(file.$f)),* }
        };
    }
    pick!(
        dataset,
        model,
        k,
        seed,
        features,
        angle_scale,
        distance,
        shots,
        feature_map,
        test_fraction,
        bins,
        policy,
        p_start,
        p_stop,
        p_step,
        trials,
        mitigate,
        noise_kind,
        injection,
        qnn_layers,
        qnn_epochs,
        qnn_learning_rate,
        qnn_rotation,
        qnn_entangler,
        data_dir,
        out
    )
}

fn rotation(s: &str) -> Result<LayerRotation, String> {
    match s {
        "ry" => Ok(LayerRotation::Ry),
        "rz" => Ok(LayerRotation::Rz),
        _ => Err("expected ry or rz".into()),
    }
}

fn entangler(s: &str) -> Result<Entangler, String> {
    match s {
        "ring" => Ok(Entangler::Ring),
        "open" | "open-chain" => Ok(Entangler::OpenChain),
        _ => Err("expected ring or open".into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Distance(bool);

impl FromStr for Distance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Distance(false)),
            "sampled" => Ok(Distance(true)),
            _ => Err("expected exact or sampled".into()),
        }
    }
}

pub fn dataset(c: &FileConfig) -> Result<DatasetKind, String> {
    parse::<DatasetKind>("dataset", c.dataset.clone())?.ok_or_else(|| "--dataset is required".to_string())
}

pub fn bench_config(c: &FileConfig) -> Result<BenchConfig, String> {
    let d = BenchConfig::default();
    let shots = c.shots.unwrap_or(DEFAULT_SHOTS);
    let distance = match parse::<Distance>("distance", c.distance.clone())? {
        Some(Distance(true)) => DistanceMode::Sampled { shots },
        _ => DistanceMode::Exact,
    };
    let mut qnn = d.qnn;
    qnn.layers = c.qnn_layers.unwrap_or(qnn.layers);
    qnn.epochs = c.qnn_epochs.unwrap_or(qnn.epochs);
    qnn.learning_rate = c.qnn_learning_rate.unwrap_or(qnn.learning_rate);
    if let Some(r) = &c.qnn_rotation {
        qnn.rotation = rotation(r).map_err(|e| format!("invalid qnn_rotation '{r}': {e}"))?;
    }
    if let Some(r) = &c.qnn_entangler {
        qnn.entangler = entangler(r).map_err(|e| format!("invalid qnn_entangler '{r}': {e}"))?;
    }
    let cfg = BenchConfig {
        dataset: dataset(c)?,
        model: parse::<ModelKind>("model", c.model.clone())?.unwrap_or(d.model),
        k: c.k.unwrap_or(d.k),
        seed: c.seed.unwrap_or(d.seed),
        features: c.features.unwrap_or(d.features),
        angle_scale: c.angle_scale.unwrap_or(d.angle_scale),
        feature_map: c.feature_map.unwrap_or(d.feature_map),
        distance,
        test_fraction: c.test_fraction.unwrap_or(d.test_fraction),
        bins: c.bins.unwrap_or(d.bins),
        qnn,
    };
    cfg.validate().map_err(|e| e.message)?;
    if !(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0) {
        return Err("test_fraction must lie strictly between 0 and 1".into());
    }
    if cfg.bins < 2 {
        return Err("bins must be at least 2".into());
    }
    if !(cfg.qnn.learning_rate > 0.0) {
        return Err("qnn_learning_rate must be positive".into());
    }
    Ok(cfg)
}

pub fn sweep_config(c: &FileConfig) -> Result<SweepConfig, String> {
    let d = SweepConfig::default();
    let mut bench = bench_config(c)?;
    bench.model = ModelKind::Qknn;
    let p_values = p_grid(c.p_start.unwrap_or(0.0), c.p_stop.unwrap_or(0.6), c.p_step.unwrap_or(0.1)).map_err(|e| e.message)?;
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("noise level {p} outside [0, 1]"));
    }
    let trials = c.trials.unwrap_or(d.trials);
    if trials == 0 {
        return Err("trials must be at least 1".into());
    }
    Ok(SweepConfig {
        bench,
        p_values,
        trials,
        mitigation: parse::<Mitigation>("mitigate", c.mitigate.clone())?.unwrap_or(d.mitigation),
        noise_kind: parse::<NoiseKind>("noise_kind", c.noise_kind.clone())?.unwrap_or(d.noise_kind),
        injection: parse::<Injection>("injection", c.injection.clone())?.unwrap_or(d.injection),
    })
}

pub fn selection(c: &FileConfig) -> Result<(DatasetKind, usize, SelectionPolicy), String> {
    let bins = c.bins.unwrap_or(10);
    if bins < 2 {
        return Err("bins must be at least 2".into());
    }
    let policy = parse::<SelectionPolicy>("policy", c.policy.clone())?.unwrap_or(SelectionPolicy::Alpha(0.05));
    Ok((dataset(c)?, bins, policy))
}
