//! Config-driven experiment harness.
//!
//! A grid config is a flat JSON object (dotted key names). [`run_grid`]
//! executes the paradigm × noise × tau × seed cross-product in a bounded
//! parallel pool, writes one epoch CSV per run plus a per-cell summary
//! CSV, and renders accuracy/precision SVG charts with ±std bands.
//! Identical configs produce byte-identical artifacts.

pub mod csv;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::adam::AdamConfig;
use crate::data::{attach_noise, load_idx, make_blobs, subsample, IdxPaths, LabeledData, NoisyDataset};
use crate::error::{Error, Result};
use crate::metrics::{last10_mean, mean_std};
use crate::model::{init_network, Activation, MlpSpec, Network, NetworkId};
use crate::noise::{build_q, NoiseKind, NoiseSpec};
use crate::schedule::ScheduleParams;
use crate::seed::derive;
use crate::trainers::{run_training, EpochRecord, Paradigm, TrainerConfig};

use csv::{read_epoch_csv, write_atomic, write_epoch_csv, RunKey};
use svg::{line_chart, Series};

// seed-derivation streams, one per stochastic role
const STREAM_BLOB_TRAIN: u64 = 10;
const STREAM_BLOB_TEST: u64 = 11;
const STREAM_SUBSAMPLE_TRAIN: u64 = 12;
const STREAM_SUBSAMPLE_TEST: u64 = 13;
const STREAM_CORRUPTION: u64 = 14;
const STREAM_INIT_F: u64 = 15;
const STREAM_INIT_G: u64 = 16;
const STREAM_SHUFFLE: u64 = 17;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetChoice {
    Mnist { dir: PathBuf },
    Blobs { classes: usize, dim: usize, spread: f64 },
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub dataset: DatasetChoice,
    pub per_class: usize,
    pub test_per_class: usize,
    pub hidden: Vec<usize>,
    pub noise_kinds: Vec<NoiseKind>,
    pub epsilons: Vec<f64>,
    /// Drop-rate ceilings to sweep; `None` means τ = ε per cell.
    pub taus: Option<Vec<f64>>,
    pub t_k: usize,
    pub c: f64,
    pub paradigms: Vec<Paradigm>,
    pub epochs: usize,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub adam: AdamConfig,
    pub bootstrap_beta: f64,
}

const KNOWN_KEYS: &[&str] = &[
    "dataset",
    "mnist_dir",
    "per_class",
    "test_per_class",
    "hidden",
    "blob.classes",
    "blob.dim",
    "blob.spread",
    "noise.kind",
    "noise.epsilon",
    "schedule.tau",
    "schedule.t_k",
    "schedule.c",
    "paradigms",
    "epochs",
    "batch_size",
    "seeds",
    "output_dir",
    "adam.lr",
    "adam.beta1",
    "adam.beta2",
    "adam.eps",
    "bootstrap.beta",
];

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn get_f64(v: &serde_json::Value, key: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| cfg_err(format!("{key} must be a number")))
}

fn get_usize(v: &serde_json::Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| cfg_err(format!("{key} must be a non-negative integer")))
}

fn number_or_array(v: &serde_json::Value, key: &str) -> Result<Vec<f64>> {
    match v {
        serde_json::Value::Array(items) => items.iter().map(|i| get_f64(i, key)).collect(),
        other => Ok(vec![get_f64(other, key)?]),
    }
}

fn string_or_array(v: &serde_json::Value, key: &str) -> Result<Vec<String>> {
    let as_str = |i: &serde_json::Value| -> Result<String> {
        i.as_str()
            .map(str::to_owned)
            .ok_or_else(|| cfg_err(format!("{key} must be a string")))
    };
    match v {
        serde_json::Value::Array(items) => items.iter().map(as_str).collect(),
        other => Ok(vec![as_str(other)?]),
    }
}

/// Parse and validate a grid config. Unknown keys fail before anything
/// runs.
pub fn parse_grid_config(text: &str) -> Result<GridConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| cfg_err(format!("config is not valid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| cfg_err("config must be a JSON object"))?;

    let unknown: Vec<&String> = obj.keys().filter(|k| !KNOWN_KEYS.contains(&k.as_str())).collect();
    if !unknown.is_empty() {
        return Err(cfg_err(format!("unknown config keys: {unknown:?}")));
    }
    let require = |key: &str| -> Result<&serde_json::Value> {
        obj.get(key).ok_or_else(|| cfg_err(format!("missing required key {key:?}")))
    };

    let dataset_name = require("dataset")?
        .as_str()
        .ok_or_else(|| cfg_err("dataset must be a string"))?;
    let dataset = match dataset_name {
        "mnist" => {
            let dir = require("mnist_dir")?
                .as_str()
                .ok_or_else(|| cfg_err("mnist_dir must be a string path"))?;
            DatasetChoice::Mnist { dir: PathBuf::from(dir) }
        }
        "blobs" => DatasetChoice::Blobs {
            classes: obj.get("blob.classes").map(|v| get_usize(v, "blob.classes")).transpose()?.unwrap_or(4),
            dim: obj.get("blob.dim").map(|v| get_usize(v, "blob.dim")).transpose()?.unwrap_or(2),
            spread: obj.get("blob.spread").map(|v| get_f64(v, "blob.spread")).transpose()?.unwrap_or(0.15),
        },
        other => return Err(cfg_err(format!("dataset must be \"mnist\" or \"blobs\", got {other:?}"))),
    };
    if matches!(dataset, DatasetChoice::Blobs { .. }) && obj.contains_key("mnist_dir") {
        return Err(cfg_err("mnist_dir is only valid with dataset=\"mnist\""));
    }

    let is_mnist = matches!(dataset, DatasetChoice::Mnist { .. });
    let per_class = obj
        .get("per_class")
        .map(|v| get_usize(v, "per_class"))
        .transpose()?
        .unwrap_or(if is_mnist { 1000 } else { 500 });
    let test_per_class = obj
        .get("test_per_class")
        .map(|v| get_usize(v, "test_per_class"))
        .transpose()?
        .unwrap_or(if is_mnist { 200 } else { 100 });
    let hidden = match obj.get("hidden") {
        Some(serde_json::Value::Array(items)) => items
            .iter()
            .map(|i| get_usize(i, "hidden"))
            .collect::<Result<Vec<usize>>>()?,
        Some(_) => return Err(cfg_err("hidden must be an array of layer widths")),
        None => {
            if is_mnist {
                vec![128]
            } else {
                vec![64]
            }
        }
    };

    let noise_kinds = string_or_array(require("noise.kind")?, "noise.kind")?
        .iter()
        .map(|s| s.parse())
        .collect::<Result<Vec<NoiseKind>>>()?;
    let epsilons = number_or_array(require("noise.epsilon")?, "noise.epsilon")?;
    for &e in &epsilons {
        if !(0.0..1.0).contains(&e) {
            return Err(cfg_err(format!("noise.epsilon must lie in [0, 1), got {e}")));
        }
    }
    let taus = obj
        .get("schedule.tau")
        .map(|v| number_or_array(v, "schedule.tau"))
        .transpose()?;
    if let Some(taus) = &taus {
        for &t in taus {
            if !(t > 0.0 && t < 1.0) {
                return Err(cfg_err(format!("schedule.tau must lie in (0, 1), got {t}")));
            }
        }
    }

    let paradigms = match require("paradigms")? {
        serde_json::Value::Array(items) => items
            .iter()
            .map(|i| {
                i.as_str()
                    .ok_or_else(|| cfg_err("paradigms entries must be strings"))
                    .and_then(|s| s.parse())
            })
            .collect::<Result<Vec<Paradigm>>>()?,
        _ => return Err(cfg_err("paradigms must be an array")),
    };
    if paradigms.is_empty() {
        return Err(cfg_err("paradigms must not be empty"));
    }

    let seeds = match require("seeds")? {
        serde_json::Value::Array(items) => items
            .iter()
            .map(|i| i.as_u64().ok_or_else(|| cfg_err("seeds must be non-negative integers")))
            .collect::<Result<Vec<u64>>>()?,
        _ => return Err(cfg_err("seeds must be an array")),
    };
    if seeds.is_empty() {
        return Err(cfg_err("seeds must not be empty"));
    }

    let adam = AdamConfig {
        learning_rate: obj.get("adam.lr").map(|v| get_f64(v, "adam.lr")).transpose()?.unwrap_or(1e-3),
        beta1: obj.get("adam.beta1").map(|v| get_f64(v, "adam.beta1")).transpose()?.unwrap_or(0.9),
        beta2: obj.get("adam.beta2").map(|v| get_f64(v, "adam.beta2")).transpose()?.unwrap_or(0.999),
        eps: obj.get("adam.eps").map(|v| get_f64(v, "adam.eps")).transpose()?.unwrap_or(1e-8),
    };
    adam.validate()?;

    let cfg = GridConfig {
        dataset,
        per_class,
        test_per_class,
        hidden,
        noise_kinds,
        epsilons,
        taus,
        t_k: obj.get("schedule.t_k").map(|v| get_usize(v, "schedule.t_k")).transpose()?.unwrap_or(10),
        c: obj.get("schedule.c").map(|v| get_f64(v, "schedule.c")).transpose()?.unwrap_or(1.0),
        paradigms,
        epochs: get_usize(require("epochs")?, "epochs")?,
        batch_size: obj.get("batch_size").map(|v| get_usize(v, "batch_size")).transpose()?.unwrap_or(128),
        seeds,
        output_dir: PathBuf::from(
            require("output_dir")?
                .as_str()
                .ok_or_else(|| cfg_err("output_dir must be a string path"))?,
        ),
        adam,
        bootstrap_beta: obj
            .get("bootstrap.beta")
            .map(|v| get_f64(v, "bootstrap.beta"))
            .transpose()?
            .unwrap_or(0.8),
    };
    if cfg.batch_size == 0 {
        return Err(cfg_err("batch_size must be positive"));
    }
    if cfg.t_k == 0 {
        return Err(cfg_err("schedule.t_k must be positive"));
    }
    // every (eps, tau) pairing must leave a positive kept fraction
    for &eps in &cfg.epsilons {
        let taus = cfg.effective_taus(eps);
        for t in taus {
            if !(t > 0.0 && t < 1.0) {
                return Err(cfg_err(format!(
                    "tau {t} (for epsilon {eps}) must lie in (0, 1): the kept side must stay positive"
                )));
            }
        }
    }
    Ok(cfg)
}

impl GridConfig {
    fn effective_taus(&self, epsilon: f64) -> Vec<f64> {
        match &self.taus {
            Some(taus) => taus.clone(),
            None => vec![epsilon],
        }
    }

    /// Deterministic cross-product of all run cells.
    pub fn run_keys(&self) -> Vec<RunKey> {
        let mut keys = Vec::new();
        for &kind in &self.noise_kinds {
            for &epsilon in &self.epsilons {
                for tau in self.effective_taus(epsilon) {
                    for &paradigm in &self.paradigms {
                        for &seed in &self.seeds {
                            keys.push(RunKey {
                                paradigm,
                                kind,
                                epsilon,
                                tau,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        keys
    }
}

/// Load the IDX train/test pair from a data directory.
pub fn load_mnist_base(dir: &Path) -> Result<(LabeledData, LabeledData)> {
    let paths = IdxPaths::under(dir);
    let train = load_idx(&paths.train_images, &paths.train_labels)?;
    let test = load_idx(&paths.test_images, &paths.test_labels)?;
    Ok((train, test))
}

/// Materialize the train/eval data a given run cell sees (the same
/// derivation `run_cell` uses).
pub fn cell_data(
    cfg: &GridConfig,
    base: Option<&(LabeledData, LabeledData)>,
    key: &RunKey,
) -> Result<(NoisyDataset, LabeledData)> {
    let (train, eval) = match &cfg.dataset {
        DatasetChoice::Blobs { classes, dim, spread } => (
            make_blobs(cfg.per_class, *classes, *dim, *spread, derive(key.seed, STREAM_BLOB_TRAIN))?,
            make_blobs(cfg.test_per_class, *classes, *dim, *spread, derive(key.seed, STREAM_BLOB_TEST))?,
        ),
        DatasetChoice::Mnist { .. } => {
            let (btrain, btest) = base.expect("mnist base loaded before runs");
            (
                subsample(btrain, cfg.per_class, derive(key.seed, STREAM_SUBSAMPLE_TRAIN))?,
                subsample(btest, cfg.test_per_class, derive(key.seed, STREAM_SUBSAMPLE_TEST))?,
            )
        }
    };
    let noisy = attach_noise(
        train,
        NoiseSpec {
            kind: key.kind,
            epsilon: key.epsilon,
            corruption_seed: derive(key.seed, STREAM_CORRUPTION),
        },
    )?;
    Ok((noisy, eval))
}

fn network_for(cfg: &GridConfig, n_classes: usize, input_dim: usize, seed: u64, id: NetworkId) -> Result<Network> {
    let mut sizes = Vec::with_capacity(cfg.hidden.len() + 2);
    sizes.push(input_dim);
    sizes.extend_from_slice(&cfg.hidden);
    sizes.push(n_classes);
    let spec = MlpSpec::new(sizes, Activation::LeakyRelu(0.01), seed)?;
    init_network(spec, id)
}

/// Execute one grid cell and return its epoch records.
pub fn run_cell(
    cfg: &GridConfig,
    base: Option<&(LabeledData, LabeledData)>,
    key: &RunKey,
) -> Result<Vec<EpochRecord>> {
    let (data, eval) = cell_data(cfg, base, key)?;
    let input_dim = data.features.cols();
    let net_f = network_for(cfg, data.n_classes, input_dim, derive(key.seed, STREAM_INIT_F), NetworkId::F)?;
    let net_g = if key.paradigm.is_dual() {
        Some(network_for(cfg, data.n_classes, input_dim, derive(key.seed, STREAM_INIT_G), NetworkId::G)?)
    } else {
        None
    };
    let trainer = TrainerConfig {
        paradigm: key.paradigm,
        batch_size: cfg.batch_size,
        epochs: cfg.epochs,
        schedule: ScheduleParams::new(key.tau, cfg.t_k, cfg.c)?,
        adam: cfg.adam.clone(),
        shuffle_seed: derive(key.seed, STREAM_SHUFFLE),
        bootstrap_beta: (key.paradigm == Paradigm::Bootstrap).then_some(cfg.bootstrap_beta),
        oracle_q: if key.paradigm == Paradigm::FCorrection {
            Some(build_q(key.kind, data.n_classes, key.epsilon)?)
        } else {
            None
        },
    };
    let run = run_training(&trainer, net_f, net_g, &data, &eval)?;
    Ok(run.records)
}

/// Artifacts produced by [`run_grid`].
#[derive(Debug, Clone)]
pub struct GridReport {
    pub run_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
    pub plot_files: Vec<PathBuf>,
}

/// Run every cell of the grid (in parallel), then summarize and plot.
pub fn run_grid(cfg: &GridConfig) -> Result<GridReport> {
    let runs_dir = cfg.output_dir.join("runs");
    fs::create_dir_all(&runs_dir)?;

    let base = match &cfg.dataset {
        DatasetChoice::Mnist { dir } => Some(load_mnist_base(dir)?),
        DatasetChoice::Blobs { .. } => None,
    };

    for &kind in &cfg.noise_kinds {
        for &eps in &cfg.epsilons {
            let spec = NoiseSpec {
                kind,
                epsilon: eps,
                corruption_seed: 0,
            };
            if spec.pair_rate_exceeds_half() {
                eprintln!(
                    "warning: pair flipping at epsilon {eps} puts over half the labels in \
                     the wrong class; the task is unlearnable without extra assumptions"
                );
            }
        }
    }

    let keys = cfg.run_keys();
    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let run_files: Vec<PathBuf> = keys
        .par_iter()
        .filter_map(|key| {
            let path = key.path_under(&runs_dir);
            match run_cell(cfg, base.as_ref(), key) {
                Ok(records) => match write_epoch_csv(&path, &records) {
                    Ok(()) => Some(path),
                    Err(e) => {
                        failures.lock().unwrap().push(format!("{}: {e}", key.file_name()));
                        None
                    }
                },
                Err(e) => {
                    failures.lock().unwrap().push(format!("{}: {e}", key.file_name()));
                    None
                }
            }
        })
        .collect();
    let failures = failures.into_inner().unwrap();
    if !failures.is_empty() {
        return Err(Error::Config(format!(
            "{} run(s) failed: {}",
            failures.len(),
            failures.join("; ")
        )));
    }
    let mut run_files = run_files;
    run_files.sort();

    let summary_file = summarize_dir(&cfg.output_dir)?;
    let plot_files = plot_dir(&cfg.output_dir)?;
    Ok(GridReport {
        run_files,
        summary_file,
        plot_files,
    })
}

fn collect_runs(dir: &Path) -> Result<Vec<(RunKey, Vec<EpochRecord>)>> {
    let runs_dir = dir.join("runs");
    let mut names: Vec<String> = fs::read_dir(&runs_dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::Config(format!("no run CSVs under {}", runs_dir.display())));
    }
    names
        .iter()
        .map(|name| {
            let key = RunKey::parse_file_name(name)?;
            let records = read_epoch_csv(&runs_dir.join(name))?;
            Ok((key, records))
        })
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "paradigm,noise_kind,epsilon,tau,n_seeds,acc_f_last10_mean,acc_f_last10_std,per_seed_last10,fingerprint";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Aggregate run CSVs under `dir/runs` into `dir/summary.csv`: one row
/// per cell with the mean and std over seeds of the last-10-epoch mean
/// test accuracy of network f.
pub fn summarize_dir(dir: &Path) -> Result<PathBuf> {
    let runs = collect_runs(dir)?;
    let mut cells: BTreeMap<String, (RunKey, BTreeMap<u64, f64>)> = BTreeMap::new();
    for (key, records) in runs {
        let accs: Vec<f64> = records.iter().map(|r| r.test_accuracy_f).collect();
        let last10 = last10_mean(&accs);
        cells
            .entry(key.cell_label())
            .or_insert_with(|| (key.clone(), BTreeMap::new()))
            .1
            .insert(key.seed, last10);
    }

    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for (label, (key, per_seed)) in &cells {
        let values: Vec<f64> = per_seed.values().copied().collect();
        let (mean, std) = mean_std(&values);
        let per_seed_str = per_seed
            .iter()
            .map(|(seed, v)| format!("{seed}:{v}"))
            .collect::<Vec<_>>()
            .join(";");
        let fingerprint = fnv1a64(format!("{label}|{per_seed_str}").as_bytes());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:016x}\n",
            key.paradigm,
            key.kind,
            key.epsilon,
            key.tau,
            per_seed.len(),
            mean,
            std,
            per_seed_str,
            fingerprint
        ));
    }
    let path = dir.join("summary.csv");
    write_atomic(&path, &out)?;
    Ok(path)
}

/// A parsed summary row (for consumers of `summary.csv`).
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub paradigm: Paradigm,
    pub kind: NoiseKind,
    pub epsilon: f64,
    pub tau: f64,
    pub n_seeds: usize,
    pub acc_mean: f64,
    pub acc_std: f64,
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SUMMARY_HEADER => {}
        other => return Err(Error::Format(format!("summary header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(Error::Format(format!("summary row {line:?}")));
            }
            Ok(SummaryRow {
                paradigm: f[0].parse()?,
                kind: f[1].parse()?,
                epsilon: f[2].parse().map_err(|_| Error::Format("bad epsilon".into()))?,
                tau: f[3].parse().map_err(|_| Error::Format("bad tau".into()))?,
                n_seeds: f[4].parse().map_err(|_| Error::Format("bad n_seeds".into()))?,
                acc_mean: f[5].parse().map_err(|_| Error::Format("bad mean".into()))?,
                acc_std: f[6].parse().map_err(|_| Error::Format("bad std".into()))?,
            })
        })
        .collect()
}

fn per_epoch_stats<F>(runs: &[&Vec<EpochRecord>], extract: F) -> Option<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&EpochRecord) -> Option<f64>,
{
    let epochs = runs.iter().map(|r| r.len()).min()?;
    if epochs == 0 {
        return None;
    }
    let mut means = Vec::with_capacity(epochs);
    let mut stds = Vec::with_capacity(epochs);
    for e in 0..epochs {
        let vals: Vec<f64> = runs.iter().filter_map(|r| extract(&r[e])).collect();
        if vals.is_empty() {
            return None;
        }
        let (m, s) = mean_std(&vals);
        means.push(m);
        stds.push(s);
    }
    Some((means, stds))
}

/// Render accuracy and label-precision charts per noise setting into
/// `dir/plots`.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let runs = collect_runs(dir)?;
    let plots_dir = dir.join("plots");
    fs::create_dir_all(&plots_dir)?;

    // group: noise setting → paradigm → runs
    let mut groups: BTreeMap<String, BTreeMap<String, Vec<&Vec<EpochRecord>>>> = BTreeMap::new();
    for (key, records) in &runs {
        let noise_label = format!("{}-{}__tau-{}", key.kind, key.epsilon, key.tau);
        groups
            .entry(noise_label)
            .or_default()
            .entry(key.paradigm.as_str().to_owned())
            .or_default()
            .push(records);
    }

    let mut written = Vec::new();
    for (noise_label, by_paradigm) in &groups {
        let mut acc_series = Vec::new();
        let mut prec_series = Vec::new();
        for (paradigm, cell_runs) in by_paradigm {
            if let Some((mean, std)) = per_epoch_stats(cell_runs, |r| Some(r.test_accuracy_f)) {
                acc_series.push(Series {
                    name: paradigm.clone(),
                    mean,
                    std,
                });
            }
            if let Some((mean, std)) = per_epoch_stats(cell_runs, |r| r.label_precision_f) {
                prec_series.push(Series {
                    name: paradigm.clone(),
                    mean,
                    std,
                });
            }
        }
        if !acc_series.is_empty() {
            let path = plots_dir.join(format!("acc__{noise_label}.svg"));
            write_atomic(
                &path,
                &line_chart(&format!("test accuracy — {noise_label}"), "accuracy", &acc_series),
            )?;
            written.push(path);
        }
        if !prec_series.is_empty() {
            let path = plots_dir.join(format!("prec__{noise_label}.svg"));
            write_atomic(
                &path,
                &line_chart(
                    &format!("label precision — {noise_label}"),
                    "label precision",
                    &prec_series,
                ),
            )?;
            written.push(path);
        }
    }
    Ok(written)
}
