//! Epoch-record CSV files and the run-file naming scheme.
//!
//! Schema: one header row, then per epoch
//! `epoch,acc_f,acc_g,prec_f,prec_g,r_t,mean_kept_loss` with empty cells
//! for absent fields. Floats are written in Rust's shortest round-trip
//! form, so reading a file back reproduces the exact values.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::noise::NoiseKind;
use crate::trainers::{EpochRecord, Paradigm};

pub const EPOCH_HEADER: &str = "epoch,acc_f,acc_g,prec_f,prec_g,r_t,mean_kept_loss";

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn epoch_csv_string(records: &[EpochRecord]) -> String {
    let mut out = String::from(EPOCH_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch,
            r.test_accuracy_f,
            opt(r.test_accuracy_g),
            opt(r.label_precision_f),
            opt(r.label_precision_g),
            r.kept_fraction,
            opt(r.mean_kept_loss),
        ));
    }
    out
}

/// Write content to `path` atomically (temp file, then rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_epoch_csv(path: &Path, records: &[EpochRecord]) -> Result<()> {
    write_atomic(path, &epoch_csv_string(records))
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Format(format!("{what}: bad float {field:?}")))
}

pub fn read_epoch_csv(path: &Path) -> Result<Vec<EpochRecord>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == EPOCH_HEADER => {}
        other => {
            return Err(Error::Format(format!(
                "{}: unexpected header {other:?}",
                path.display()
            )))
        }
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Format(format!(
                "{}:{}: expected 7 fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let what = "epoch csv";
        records.push(EpochRecord {
            epoch: fields[0]
                .parse()
                .map_err(|_| Error::Format(format!("{what}: bad epoch {:?}", fields[0])))?,
            test_accuracy_f: fields[1]
                .parse()
                .map_err(|_| Error::Format(format!("{what}: bad acc_f {:?}", fields[1])))?,
            test_accuracy_g: parse_opt(fields[2], what)?,
            label_precision_f: parse_opt(fields[3], what)?,
            label_precision_g: parse_opt(fields[4], what)?,
            kept_fraction: fields[5]
                .parse()
                .map_err(|_| Error::Format(format!("{what}: bad r_t {:?}", fields[5])))?,
            mean_kept_loss: parse_opt(fields[6], what)?,
        });
    }
    Ok(records)
}

/// Identity of one run file within a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunKey {
    pub paradigm: Paradigm,
    pub kind: NoiseKind,
    pub epsilon: f64,
    pub tau: f64,
    pub seed: u64,
}

impl RunKey {
    /// Cell identity: everything but the seed.
    pub fn cell_label(&self) -> String {
        format!(
            "{}__{}-{}__tau-{}",
            self.paradigm, self.kind, self.epsilon, self.tau
        )
    }

    pub fn file_name(&self) -> String {
        format!("{}__seed-{}.csv", self.cell_label(), self.seed)
    }

    pub fn path_under(&self, runs_dir: &Path) -> PathBuf {
        runs_dir.join(self.file_name())
    }

    pub fn parse_file_name(name: &str) -> Result<RunKey> {
        let stem = name
            .strip_suffix(".csv")
            .ok_or_else(|| Error::Format(format!("run file {name:?} is not .csv")))?;
        let parts: Vec<&str> = stem.split("__").collect();
        if parts.len() != 4 {
            return Err(Error::Format(format!("run file {name:?} has unexpected shape")));
        }
        let paradigm: Paradigm = parts[0].parse()?;
        let (kind_str, eps_str) = parts[1]
            .split_once('-')
            .ok_or_else(|| Error::Format(format!("run file {name:?}: bad noise field")))?;
        let kind: NoiseKind = kind_str.parse()?;
        let epsilon: f64 = eps_str
            .parse()
            .map_err(|_| Error::Format(format!("run file {name:?}: bad epsilon")))?;
        let tau: f64 = parts[2]
            .strip_prefix("tau-")
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Format(format!("run file {name:?}: bad tau field")))?;
        let seed: u64 = parts[3]
            .strip_prefix("seed-")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("run file {name:?}: bad seed field")))?;
        Ok(RunKey {
            paradigm,
            kind,
            epsilon,
            tau,
            seed,
        })
    }
}
