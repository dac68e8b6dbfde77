//! Dataset ingestion and preparation.
//!
//! Sources: IDX image/label pairs (big-endian, magic 0x803/0x801) and
//! synthetic Gaussian blobs. Either becomes a [`NoisyDataset`] carrying
//! both the clean and the corrupted labels; training code only ever sees
//! the noisy ones through [`TrainBatch`], clean labels stay on the
//! metrics path.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::noise::{build_q, corrupt_labels, NoiseKind, NoiseSpec};
use crate::tensor::Tensor;

const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
const IDX_LABEL_MAGIC: u32 = 0x0000_0801;

/// Features with ground-truth labels (evaluation data, or the input to
/// noise attachment).
#[derive(Debug, Clone)]
pub struct LabeledData {
    /// N×d feature matrix; image pixels are scaled to [0, 1].
    pub features: Tensor,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

impl LabeledData {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Training data carrying both label sets. The noisy labels drive
/// training; the clean ones exist solely for metrics.
#[derive(Debug, Clone)]
pub struct NoisyDataset {
    pub features: Tensor,
    pub clean_labels: Vec<usize>,
    pub noisy_labels: Vec<usize>,
    pub n_classes: usize,
    pub noise_spec: NoiseSpec,
    /// Fraction of positions where clean ≠ noisy.
    pub realized_noise_rate: f64,
}

/// One mini-batch as seen by a training step: features, noisy labels and
/// the dataset indices each row came from. No clean labels.
#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub epoch: usize,
    pub batch_index: usize,
    pub x: Tensor,
    pub noisy_labels: Vec<usize>,
    pub dataset_indices: Vec<usize>,
}

impl TrainBatch {
    pub fn len(&self) -> usize {
        self.noisy_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.noisy_labels.is_empty()
    }

    /// Sub-batch at the given positions, preserving their order.
    pub fn subset(&self, positions: &[usize]) -> Result<TrainBatch> {
        Ok(TrainBatch {
            epoch: self.epoch,
            batch_index: self.batch_index,
            x: self.x.take_rows(positions)?,
            noisy_labels: positions.iter().map(|&p| self.noisy_labels[p]).collect(),
            dataset_indices: positions.iter().map(|&p| self.dataset_indices[p]).collect(),
        })
    }
}

impl NoisyDataset {
    pub fn len(&self) -> usize {
        self.clean_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clean_labels.is_empty()
    }

    pub fn recompute_noise_rate(&self) -> f64 {
        realized_rate(&self.clean_labels, &self.noisy_labels)
    }

    /// Assemble the training view of the rows at `indices`.
    pub fn train_batch(&self, epoch: usize, batch_index: usize, indices: &[usize]) -> Result<TrainBatch> {
        Ok(TrainBatch {
            epoch,
            batch_index,
            x: self.features.take_rows(indices)?,
            noisy_labels: indices.iter().map(|&i| self.noisy_labels[i]).collect(),
            dataset_indices: indices.to_vec(),
        })
    }
}

fn realized_rate(clean: &[usize], noisy: &[usize]) -> f64 {
    if clean.is_empty() {
        return 0.0;
    }
    let flipped = clean.iter().zip(noisy).filter(|(c, n)| c != n).count();
    flipped as f64 / clean.len() as f64
}

// ── IDX files ────────────────────────────────────────────────────────

fn be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    let end = offset + 4;
    if bytes.len() < end {
        return Err(Error::Format(format!(
            "{what}: file truncated at offset {offset} (need 4 bytes, have {})",
            bytes.len().saturating_sub(offset)
        )));
    }
    Ok(u32::from_be_bytes(bytes[offset..end].try_into().unwrap()))
}

/// Parse an IDX image/label file pair into features scaled to [0, 1].
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledData> {
    let img = fs::read(images_path)?;
    let magic = be_u32(&img, 0, "image file")?;
    if magic != IDX_IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "image file magic 0x{magic:08x} at offset 0, expected 0x{IDX_IMAGE_MAGIC:08x}"
        )));
    }
    let count = be_u32(&img, 4, "image file")? as usize;
    let rows = be_u32(&img, 8, "image file")? as usize;
    let cols = be_u32(&img, 12, "image file")? as usize;
    let d = rows * cols;
    let expected = 16 + count * d;
    if img.len() != expected {
        return Err(Error::Format(format!(
            "image file length {} but header implies {expected}",
            img.len()
        )));
    }

    let lab = fs::read(labels_path)?;
    let magic = be_u32(&lab, 0, "label file")?;
    if magic != IDX_LABEL_MAGIC {
        return Err(Error::Format(format!(
            "label file magic 0x{magic:08x} at offset 0, expected 0x{IDX_LABEL_MAGIC:08x}"
        )));
    }
    let lab_count = be_u32(&lab, 4, "label file")? as usize;
    if lab.len() != 8 + lab_count {
        return Err(Error::Format(format!(
            "label file length {} but header implies {}",
            lab.len(),
            8 + lab_count
        )));
    }
    if lab_count != count {
        return Err(Error::Format(format!(
            "count mismatch: {count} images vs {lab_count} labels"
        )));
    }

    let features: Vec<f64> = img[16..].iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = lab[8..].iter().map(|&b| b as usize).collect();
    let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    Ok(LabeledData {
        features: Tensor::new(vec![count, d], features)?,
        labels,
        n_classes,
    })
}

/// Write an IDX image/label pair (the inverse of [`load_idx`]).
pub fn write_idx(
    images_path: &Path,
    labels_path: &Path,
    pixels: &[u8],
    labels: &[u8],
    rows: usize,
    cols: usize,
) -> Result<()> {
    let count = labels.len();
    if pixels.len() != count * rows * cols {
        return Err(Error::Contract(format!(
            "pixel buffer {} vs {count} images of {rows}x{cols}",
            pixels.len()
        )));
    }
    let mut img = Vec::with_capacity(16 + pixels.len());
    img.extend_from_slice(&IDX_IMAGE_MAGIC.to_be_bytes());
    img.extend_from_slice(&(count as u32).to_be_bytes());
    img.extend_from_slice(&(rows as u32).to_be_bytes());
    img.extend_from_slice(&(cols as u32).to_be_bytes());
    img.extend_from_slice(pixels);
    fs::write(images_path, img)?;

    let mut lab = Vec::with_capacity(8 + count);
    lab.extend_from_slice(&IDX_LABEL_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(count as u32).to_be_bytes());
    lab.extend_from_slice(labels);
    fs::write(labels_path, lab)?;
    Ok(())
}

// ── synthetic data ───────────────────────────────────────────────────

/// Gaussian blobs: class centers sit on the unit circle in the first two
/// dimensions (zero elsewhere), with isotropic noise of stddev `spread`.
pub fn make_blobs(
    n_per_class: usize,
    n_classes: usize,
    d: usize,
    spread: f64,
    seed: u64,
) -> Result<LabeledData> {
    if n_classes < 2 || n_per_class == 0 {
        return Err(Error::Contract(
            "make_blobs needs ≥ 2 classes and ≥ 1 sample per class".into(),
        ));
    }
    if d < 2 {
        return Err(Error::Contract("make_blobs needs d ≥ 2".into()));
    }
    if !(spread >= 0.0) {
        return Err(Error::Domain(format!("spread must be ≥ 0, got {spread}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_per_class * n_classes;
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n_classes {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / n_classes as f64;
        let center = [angle.cos(), angle.sin()];
        for _ in 0..n_per_class {
            for j in 0..d {
                let base = if j < 2 { center[j] } else { 0.0 };
                let noise: f64 = rng.sample(StandardNormal);
                features.push(base + spread * noise);
            }
            labels.push(k);
        }
    }
    Ok(LabeledData {
        features: Tensor::new(vec![n, d], features)?,
        labels,
        n_classes,
    })
}

/// Class-balanced subsample without replacement: exactly `per_class`
/// instances of every class, drawn by seed, returned in ascending
/// original order.
pub fn subsample(data: &LabeledData, per_class: usize, seed: u64) -> Result<LabeledData> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes];
    for (i, &y) in data.labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(per_class * data.n_classes);
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.len() < per_class {
            return Err(Error::Contract(format!(
                "class {class} has {} instances, need {per_class}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        chosen.extend_from_slice(&members[..per_class]);
    }
    chosen.sort_unstable();
    Ok(LabeledData {
        features: data.features.take_rows(&chosen)?,
        labels: chosen.iter().map(|&i| data.labels[i]).collect(),
        n_classes: data.n_classes,
    })
}

/// Corrupt the labels once per the noise spec and package everything a
/// run needs. The clean labels are retained for metrics only.
pub fn attach_noise(data: LabeledData, spec: NoiseSpec) -> Result<NoisyDataset> {
    let q = build_q(spec.kind, data.n_classes, spec.epsilon)?;
    let noisy = corrupt_labels(&data.labels, &q, spec.corruption_seed)?;
    let realized = realized_rate(&data.labels, &noisy);
    Ok(NoisyDataset {
        features: data.features,
        clean_labels: data.labels,
        noisy_labels: noisy,
        n_classes: data.n_classes,
        noise_spec: spec,
        realized_noise_rate: realized,
    })
}

// ── dataset cache ────────────────────────────────────────────────────

const CACHE_META: &str = "meta.json";
const CACHE_FEATURES: &str = "features.le.f64";
const CACHE_CLEAN: &str = "clean_labels.le.u32";
const CACHE_NOISY: &str = "noisy_labels.le.u32";

/// Persist a dataset as a directory: JSON metadata plus raw little-endian
/// arrays for features and both label lists.
pub fn save_cache(ds: &NoisyDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let meta = serde_json::json!({
        "n": ds.len(),
        "d": ds.features.cols(),
        "n_classes": ds.n_classes,
        "noise_kind": ds.noise_spec.kind.to_string(),
        "epsilon": ds.noise_spec.epsilon,
        "corruption_seed": ds.noise_spec.corruption_seed,
        "realized_noise_rate": ds.realized_noise_rate,
    });
    let mut f = fs::File::create(dir.join(CACHE_META))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&meta).expect("static json"))?;

    let mut buf = Vec::with_capacity(ds.features.data.len() * 8);
    for v in &ds.features.data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(dir.join(CACHE_FEATURES), buf)?;
    for (name, labels) in [(CACHE_CLEAN, &ds.clean_labels), (CACHE_NOISY, &ds.noisy_labels)] {
        let mut buf = Vec::with_capacity(labels.len() * 4);
        for &y in labels.iter() {
            buf.extend_from_slice(&(y as u32).to_le_bytes());
        }
        fs::write(dir.join(name), buf)?;
    }
    Ok(())
}

/// Reload a cache directory written by [`save_cache`]. The stored
/// realized noise rate must match the recomputed one exactly.
pub fn load_cache(dir: &Path) -> Result<NoisyDataset> {
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(CACHE_META))?)
        .map_err(|e| Error::Format(format!("cache metadata: {e}")))?;
    let get_u64 = |key: &str| -> Result<u64> {
        meta.get(key)
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Format(format!("cache metadata missing {key}")))
    };
    let n = get_u64("n")? as usize;
    let d = get_u64("d")? as usize;
    let n_classes = get_u64("n_classes")? as usize;
    let kind: NoiseKind = meta
        .get("noise_kind")
        .and_then(|v| v.as_str())
        .ok_or_else(|| Error::Format("cache metadata missing noise_kind".into()))?
        .parse()?;
    let epsilon = meta
        .get("epsilon")
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::Format("cache metadata missing epsilon".into()))?;
    let corruption_seed = get_u64("corruption_seed")?;
    let stored_rate = meta
        .get("realized_noise_rate")
        .and_then(|v| v.as_f64())
        .ok_or_else(|| Error::Format("cache metadata missing realized_noise_rate".into()))?;

    let fbytes = fs::read(dir.join(CACHE_FEATURES))?;
    if fbytes.len() != n * d * 8 {
        return Err(Error::Format(format!(
            "feature array is {} bytes, metadata implies {}",
            fbytes.len(),
            n * d * 8
        )));
    }
    let features: Vec<f64> = fbytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let read_labels = |name: &str| -> Result<Vec<usize>> {
        let bytes = fs::read(dir.join(name))?;
        if bytes.len() != n * 4 {
            return Err(Error::Format(format!(
                "{name} is {} bytes, metadata implies {}",
                bytes.len(),
                n * 4
            )));
        }
        Ok(bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()) as usize)
            .collect())
    };
    let clean_labels = read_labels(CACHE_CLEAN)?;
    let noisy_labels = read_labels(CACHE_NOISY)?;

    let ds = NoisyDataset {
        features: Tensor::new(vec![n, d], features)?,
        clean_labels,
        noisy_labels,
        n_classes,
        noise_spec: NoiseSpec {
            kind,
            epsilon,
            corruption_seed,
        },
        realized_noise_rate: stored_rate,
    };
    let recomputed = ds.recompute_noise_rate();
    if recomputed != stored_rate {
        return Err(Error::Format(format!(
            "cache noise rate {stored_rate} does not match labels ({recomputed})"
        )));
    }
    Ok(ds)
}

// ── image-like synthetic IDX corpus ──────────────────────────────────

/// Parameters for the synthetic image corpus used when no real IDX data
/// is on disk: one smooth random template per class, each sample a
/// shifted, noised copy.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticIdxSpec {
    pub train_n: usize,
    pub test_n: usize,
    pub classes: usize,
    pub side: usize,
    pub seed: u64,
}

impl Default for SyntheticIdxSpec {
    fn default() -> Self {
        SyntheticIdxSpec {
            train_n: 60_000,
            test_n: 10_000,
            classes: 10,
            side: 28,
            seed: 0x1d_u64,
        }
    }
}

/// Paths of a generated IDX corpus.
#[derive(Debug, Clone)]
pub struct IdxPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl IdxPaths {
    /// Conventional file names under a data directory.
    pub fn under(dir: &Path) -> IdxPaths {
        IdxPaths {
            train_images: dir.join("train-images-idx3-ubyte"),
            train_labels: dir.join("train-labels-idx1-ubyte"),
            test_images: dir.join("t10k-images-idx3-ubyte"),
            test_labels: dir.join("t10k-labels-idx1-ubyte"),
        }
    }

    pub fn all_exist(&self) -> bool {
        [&self.train_images, &self.train_labels, &self.test_images, &self.test_labels]
            .iter()
            .all(|p| p.exists())
    }
}

fn bump_field(rng: &mut ChaCha8Rng, side: usize, bumps: usize) -> Vec<f64> {
    let mut img = vec![0.0f64; side * side];
    for _ in 0..bumps {
        let cx = rng.gen_range(0.15..0.85) * side as f64;
        let cy = rng.gen_range(0.15..0.85) * side as f64;
        let sigma = rng.gen_range(1.8..4.5);
        let amp: f64 = rng.gen_range(0.5..1.0) * if rng.gen_bool(0.7) { 1.0 } else { -1.0 };
        for y in 0..side {
            for x in 0..side {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                img[y * side + x] += amp * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
    }
    img
}

fn normalize_unit(img: &mut [f64]) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in img.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let span = (hi - lo).max(1e-9);
    img.iter_mut().for_each(|v| *v = (*v - lo) / span);
}

fn class_template(rng: &mut ChaCha8Rng, side: usize) -> Vec<f64> {
    let mut img = bump_field(rng, side, 6);
    normalize_unit(&mut img);
    img
}

fn render_sample(template: &[f64], side: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let dx = rng.gen_range(-3i64..=3);
    let dy = rng.gen_range(-3i64..=3);
    let noise_sd = 0.30;
    let mut out = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let sx = x as i64 - dx;
            let sy = y as i64 - dy;
            let base = if sx >= 0 && sy >= 0 && (sx as usize) < side && (sy as usize) < side {
                template[sy as usize * side + sx as usize]
            } else {
                0.0
            };
            let n: f64 = rng.sample(StandardNormal);
            let v = (base + noise_sd * n).clamp(0.0, 1.0);
            out.push((v * 255.0).round() as u8);
        }
    }
    out
}

/// Generate a deterministic image-classification corpus in IDX format.
/// Labels cycle through the classes, so every class count is exact.
pub fn write_synthetic_idx(dir: &Path, spec: &SyntheticIdxSpec) -> Result<IdxPaths> {
    if spec.classes < 2 || spec.classes > 256 {
        return Err(Error::Contract("synthetic corpus needs 2..=256 classes".into()));
    }
    fs::create_dir_all(dir)?;
    let paths = IdxPaths::under(dir);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let templates: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| class_template(&mut rng, spec.side))
        .collect();

    for (n, images_path, labels_path, stream) in [
        (spec.train_n, &paths.train_images, &paths.train_labels, 1u64),
        (spec.test_n, &paths.test_images, &paths.test_labels, 2u64),
    ] {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(spec.seed, stream));
        let mut pixels = Vec::with_capacity(n * spec.side * spec.side);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let class = i % spec.classes;
            pixels.extend_from_slice(&render_sample(&templates[class], spec.side, &mut rng));
            labels.push(class as u8);
        }
        write_idx(images_path, labels_path, &pixels, &labels, spec.side, spec.side)?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_determinism_and_degenerate_spread() {
        let a = make_blobs(10, 3, 2, 0.1, 5).unwrap();
        let b = make_blobs(10, 3, 2, 0.1, 5).unwrap();
        assert_eq!(a.features.data, b.features.data);
        assert_eq!(a.labels, b.labels);

        let z = make_blobs(4, 3, 2, 0.0, 5).unwrap();
        for k in 0..3 {
            let first = z.features.row(k * 4).to_vec();
            for j in 1..4 {
                assert_eq!(z.features.row(k * 4 + j), &first[..]);
            }
        }
    }

    #[test]
    fn blobs_are_nearest_centroid_separable() {
        let data = make_blobs(500, 4, 2, 0.15, 42).unwrap();
        // centroid of each class from true labels
        let d = data.features.cols();
        let mut centroids = vec![vec![0.0; d]; 4];
        let mut counts = vec![0usize; 4];
        for (i, &y) in data.labels.iter().enumerate() {
            counts[y] += 1;
            for (c, v) in centroids[y].iter_mut().zip(data.features.row(i)) {
                *c += v;
            }
        }
        for (c, n) in centroids.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|v| *v /= *n as f64);
        }
        let mut correct = 0usize;
        for (i, &y) in data.labels.iter().enumerate() {
            let row = data.features.row(i);
            let nearest = (0..4)
                .min_by(|&a, &b| {
                    let da: f64 = centroids[a].iter().zip(row).map(|(c, v)| (c - v).powi(2)).sum();
                    let db: f64 = centroids[b].iter().zip(row).map(|(c, v)| (c - v).powi(2)).sum();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            if nearest == y {
                correct += 1;
            }
        }
        let acc = correct as f64 / data.len() as f64;
        assert!(acc > 0.99, "nearest-centroid accuracy {acc}");
    }

    #[test]
    fn subsample_is_exactly_balanced() {
        let data = make_blobs(50, 4, 2, 0.3, 9).unwrap();
        let sub = subsample(&data, 20, 3).unwrap();
        assert_eq!(sub.len(), 80);
        let mut counts = vec![0usize; 4];
        for &y in &sub.labels {
            counts[y] += 1;
        }
        assert_eq!(counts, vec![20; 4]);
    }

    #[test]
    fn subsample_insufficient_class_is_an_error() {
        let data = make_blobs(10, 3, 2, 0.3, 9).unwrap();
        assert!(subsample(&data, 11, 3).is_err());
    }

    #[test]
    fn subsample_full_count_is_identity_up_to_order() {
        let data = make_blobs(10, 3, 2, 0.3, 9).unwrap();
        let sub = subsample(&data, 10, 1).unwrap();
        assert_eq!(sub.features.data, data.features.data);
        assert_eq!(sub.labels, data.labels);
    }

    #[test]
    fn attach_noise_zero_rate() {
        let data = make_blobs(50, 4, 2, 0.2, 1).unwrap();
        let ds = attach_noise(
            data,
            NoiseSpec {
                kind: NoiseKind::Symmetry,
                epsilon: 0.0,
                corruption_seed: 5,
            },
        )
        .unwrap();
        assert_eq!(ds.realized_noise_rate, 0.0);
        assert_eq!(ds.clean_labels, ds.noisy_labels);
    }

    #[test]
    fn attach_noise_realized_rate_concentrates() {
        let data = make_blobs(1000, 10, 2, 0.2, 1).unwrap();
        let ds = attach_noise(
            data,
            NoiseSpec {
                kind: NoiseKind::Symmetry,
                epsilon: 0.5,
                corruption_seed: 5,
            },
        )
        .unwrap();
        assert!((ds.realized_noise_rate - 0.5).abs() < 0.015);
        assert_eq!(ds.realized_noise_rate, ds.recompute_noise_rate());

        let data = make_blobs(2000, 5, 2, 0.2, 2).unwrap();
        let ds = attach_noise(
            data,
            NoiseSpec {
                kind: NoiseKind::Pair,
                epsilon: 0.45,
                corruption_seed: 6,
            },
        )
        .unwrap();
        assert!((ds.realized_noise_rate - 0.45).abs() < 0.015);
    }

    #[test]
    fn idx_round_trip_and_magic_checks() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("imgs");
        let labels = dir.path().join("labs");
        let pixels: Vec<u8> = (0..4 * 4 * 3).map(|i| (i * 7 % 256) as u8).collect();
        write_idx(&images, &labels, &pixels, &[0, 1, 2], 4, 4).unwrap();

        let data = load_idx(&images, &labels).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(data.features.cols(), 16);
        assert_eq!(data.labels, vec![0, 1, 2]);
        assert_eq!(data.features.data[0], pixels[0] as f64 / 255.0);

        // byte 255 scales to exactly 1.0
        let mut bright = pixels.clone();
        bright[5] = 255;
        write_idx(&images, &labels, &bright, &[0, 1, 2], 4, 4).unwrap();
        let data = load_idx(&images, &labels).unwrap();
        assert_eq!(data.features.data[5], 1.0);

        // swapped files: label magic where image magic expected
        let err = load_idx(&labels, &images).unwrap_err().to_string();
        assert!(err.contains("0x00000801"), "{err}");
        assert!(err.contains("offset 0"), "{err}");
    }

    #[test]
    fn idx_count_mismatch_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let images = dir.path().join("imgs");
        let labels = dir.path().join("labs");
        write_idx(&images, &labels, &[0u8; 32], &[0, 1], 4, 4).unwrap();

        let other_labels = dir.path().join("labs3");
        write_idx(&dir.path().join("imgs3"), &other_labels, &[0u8; 48], &[0, 1, 2], 4, 4).unwrap();
        let err = load_idx(&images, &other_labels).unwrap_err().to_string();
        assert!(err.contains("count mismatch"), "{err}");

        let mut bytes = fs::read(&images).unwrap();
        bytes.truncate(bytes.len() - 5);
        fs::write(&images, bytes).unwrap();
        let err = load_idx(&images, &labels).unwrap_err().to_string();
        assert!(err.contains("length"), "{err}");
    }

    #[test]
    fn cache_round_trips_bitwise() {
        let data = make_blobs(30, 3, 4, 0.2, 8).unwrap();
        let ds = attach_noise(
            data,
            NoiseSpec {
                kind: NoiseKind::Pair,
                epsilon: 0.3,
                corruption_seed: 11,
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_cache(&ds, dir.path()).unwrap();
        let back = load_cache(dir.path()).unwrap();
        assert_eq!(back.features.data, ds.features.data);
        assert_eq!(back.clean_labels, ds.clean_labels);
        assert_eq!(back.noisy_labels, ds.noisy_labels);
        assert_eq!(back.realized_noise_rate, ds.realized_noise_rate);
        assert_eq!(back.noise_spec, ds.noise_spec);
    }

    #[test]
    fn synthetic_idx_loads_and_balances() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticIdxSpec {
            train_n: 200,
            test_n: 50,
            classes: 10,
            side: 28,
            seed: 3,
        };
        let paths = write_synthetic_idx(dir.path(), &spec).unwrap();
        let train = load_idx(&paths.train_images, &paths.train_labels).unwrap();
        assert_eq!(train.len(), 200);
        assert_eq!(train.features.cols(), 784);
        assert_eq!(train.n_classes, 10);
        let mut counts = vec![0usize; 10];
        for &y in &train.labels {
            counts[y] += 1;
        }
        assert_eq!(counts, vec![20; 10]);
    }
}
