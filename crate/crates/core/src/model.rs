//! Small MLP classifiers with per-sample cross-entropy losses.
//!
//! Two networks built from the same spec but different seeds give the
//! distinct-initialization pair the dual-network paradigms need.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tape::{log_softmax_rows_inplace, matmul_2d, NodeId, Tape};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Relu,
    /// Leaky ReLU with the given negative-side slope (0.01 by default).
    LeakyRelu(f64),
}

impl Default for Activation {
    fn default() -> Self {
        Activation::LeakyRelu(0.01)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpSpec {
    /// Layer widths: input, hidden..., classes.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub init_seed: u64,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation, init_seed: u64) -> Result<Self> {
        let spec = MlpSpec {
            layer_sizes,
            activation,
            init_seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Contract(
                "mlp spec needs at least input and output sizes".into(),
            ));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Contract("mlp layer sizes must be positive".into()));
        }
        if let Activation::LeakyRelu(s) = self.activation {
            if !s.is_finite() {
                return Err(Error::Numeric("leaky_relu slope must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }
}

/// Which of the two peer networks a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkId {
    F,
    G,
}

impl NetworkId {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkId::F => "f",
            NetworkId::G => "g",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Network {
    pub spec: MlpSpec,
    /// Interleaved weight and bias tensors: W1, b1, W2, b2, ...
    pub parameters: Vec<Tensor>,
    pub id: NetworkId,
}

/// Glorot-uniform initialization: weights from U(−a, a) with
/// a = sqrt(6 / (fan_in + fan_out)), biases zero. The draw sequence is
/// fully determined by `spec.init_seed`.
pub fn init_network(spec: MlpSpec, id: NetworkId) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.init_seed);
    let mut parameters = Vec::with_capacity(2 * (spec.layer_sizes.len() - 1));
    for pair in spec.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let w: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| a * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        parameters.push(Tensor::new(vec![fan_in, fan_out], w)?.with_grad());
        parameters.push(Tensor::zeros(vec![fan_out]).with_grad());
    }
    Ok(Network { spec, parameters, id })
}

/// A recorded forward pass whose per-sample losses are ready to reduce
/// and backpropagate.
pub struct LossGraph {
    pub tape: Tape,
    /// Tape leaves for `Network::parameters`, in the same order.
    pub param_ids: Vec<NodeId>,
    pub logits: NodeId,
    /// Vector node of per-sample cross-entropy losses.
    pub per_sample: NodeId,
}

impl Network {
    pub fn n_classes(&self) -> usize {
        self.spec.n_classes()
    }

    fn check_batch(&self, batch_x: &Tensor, labels: Option<&[usize]>) -> Result<()> {
        if batch_x.shape.len() != 2 || batch_x.cols() != self.spec.input_dim() {
            return Err(Error::shape(
                "forward",
                format!(
                    "batch {:?} vs input dim {}",
                    batch_x.shape,
                    self.spec.input_dim()
                ),
            ));
        }
        if let Some(labels) = labels {
            if labels.len() != batch_x.rows() {
                return Err(Error::Contract(format!(
                    "{} rows but {} labels",
                    batch_x.rows(),
                    labels.len()
                )));
            }
            if let Some(&bad) = labels.iter().find(|&&l| l >= self.n_classes()) {
                return Err(Error::Contract(format!(
                    "label {bad} out of range for {} classes",
                    self.n_classes()
                )));
            }
        }
        Ok(())
    }

    /// Register parameters on a tape and record the forward pass up to the
    /// logits node.
    pub fn forward_graph(&self, tape: &mut Tape, x: NodeId) -> Result<(Vec<NodeId>, NodeId)> {
        let param_ids: Vec<NodeId> = self
            .parameters
            .iter()
            .map(|p| tape.leaf(p))
            .collect::<Result<_>>()?;
        let n_layers = self.spec.layer_sizes.len() - 1;
        let mut h = x;
        for l in 0..n_layers {
            let z = tape.matmul(h, param_ids[2 * l])?;
            h = tape.add(z, param_ids[2 * l + 1])?;
            if l + 1 < n_layers {
                h = match self.spec.activation {
                    Activation::Relu => tape.relu(h)?,
                    Activation::LeakyRelu(s) => tape.leaky_relu(h, s)?,
                };
            }
        }
        Ok((param_ids, h))
    }

    /// Record the full cross-entropy loss graph for a batch: per-sample
    /// loss i is −log softmax(logits_i)[labels_i].
    pub fn ce_loss_graph(&self, batch_x: &Tensor, labels: &[usize]) -> Result<LossGraph> {
        self.check_batch(batch_x, Some(labels))?;
        let mut tape = Tape::new();
        let x = tape.leaf(batch_x)?;
        let (param_ids, logits) = self.forward_graph(&mut tape, x)?;
        let log_probs = tape.log_softmax_rows(logits)?;
        let picked = tape.gather_rows(log_probs, labels)?;
        let per_sample = tape.scale(picked, -1.0)?;
        Ok(LossGraph {
            tape,
            param_ids,
            logits,
            per_sample,
        })
    }

    /// Per-sample cross-entropy values, computed without recording a tape.
    /// Identical arithmetic to [`Network::ce_loss_graph`], kernel for kernel.
    pub fn per_sample_losses(&self, batch_x: &Tensor, labels: &[usize]) -> Result<Vec<f64>> {
        self.check_batch(batch_x, Some(labels))?;
        let mut log_probs = self.logits_values(batch_x)?;
        let (n, c) = (batch_x.rows(), self.n_classes());
        log_softmax_rows_inplace(&mut log_probs, n, c);
        Ok(labels
            .iter()
            .enumerate()
            .map(|(i, &l)| -log_probs[i * c + l])
            .collect())
    }

    /// Raw logits without tape bookkeeping (evaluation path).
    pub fn logits_values(&self, batch_x: &Tensor) -> Result<Vec<f64>> {
        self.check_batch(batch_x, None)?;
        let n = batch_x.rows();
        let n_layers = self.spec.layer_sizes.len() - 1;
        let mut h = batch_x.data.clone();
        let mut width = batch_x.cols();
        for l in 0..n_layers {
            let w = &self.parameters[2 * l];
            let b = &self.parameters[2 * l + 1];
            let out_w = w.cols();
            let mut z = matmul_2d(&h, &w.data, n, width, out_w);
            for (i, v) in z.iter_mut().enumerate() {
                *v += b.data[i % out_w];
            }
            if l + 1 < n_layers {
                match self.spec.activation {
                    Activation::Relu => z.iter_mut().for_each(|v| *v = v.max(0.0)),
                    Activation::LeakyRelu(s) => z
                        .iter_mut()
                        .for_each(|v| *v = if *v > 0.0 { *v } else { s * *v }),
                }
            }
            h = z;
            width = out_w;
        }
        Ok(h)
    }

    /// Argmax predictions; ties resolve to the lowest class index.
    pub fn predict(&self, batch_x: &Tensor) -> Result<Vec<usize>> {
        let logits = self.logits_values(batch_x)?;
        let c = self.n_classes();
        Ok((0..batch_x.rows())
            .map(|i| argmax(&logits[i * c..(i + 1) * c]))
            .collect())
    }

    /// Mean cross-entropy over a batch, value only.
    pub fn mean_loss(&self, batch_x: &Tensor, labels: &[usize]) -> Result<f64> {
        let losses = self.per_sample_losses(batch_x, labels)?;
        Ok(losses.iter().sum::<f64>() / losses.len() as f64)
    }

    /// Write parameters: one JSON header line listing tensor shapes, then
    /// the concatenated data as little-endian f64.
    pub fn save_parameters(&self, path: &Path) -> Result<()> {
        let shapes: Vec<Vec<usize>> = self.parameters.iter().map(|p| p.shape.clone()).collect();
        let header = serde_json::json!({ "shapes": shapes });
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{header}")?;
        for p in &self.parameters {
            for v in &p.data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Load parameters written by [`Network::save_parameters`]; shapes in
    /// the header must match this network exactly.
    pub fn load_parameters(&mut self, path: &Path) -> Result<()> {
        let mut r = BufReader::new(File::open(path)?);
        let mut header = String::new();
        r.read_line(&mut header)?;
        let parsed: serde_json::Value = serde_json::from_str(header.trim())
            .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
        let shapes = parsed
            .get("shapes")
            .and_then(|s| s.as_array())
            .ok_or_else(|| Error::Format("checkpoint header missing shapes".into()))?;
        if shapes.len() != self.parameters.len() {
            return Err(Error::Format(format!(
                "checkpoint has {} tensors, network has {}",
                shapes.len(),
                self.parameters.len()
            )));
        }
        for (i, (s, p)) in shapes.iter().zip(&self.parameters).enumerate() {
            let dims: Vec<usize> = s
                .as_array()
                .map(|a| a.iter().filter_map(|v| v.as_u64()).map(|v| v as usize).collect())
                .unwrap_or_default();
            if dims != p.shape {
                return Err(Error::Format(format!(
                    "checkpoint tensor {i} shape {dims:?} vs network {:?}",
                    p.shape
                )));
            }
        }
        for p in &mut self.parameters {
            let mut buf = vec![0u8; p.numel() * 8];
            r.read_exact(&mut buf)
                .map_err(|e| Error::Format(format!("checkpoint truncated: {e}")))?;
            for (v, chunk) in p.data.iter_mut().zip(buf.chunks_exact(8)) {
                *v = f64::from_le_bytes(chunk.try_into().unwrap());
            }
        }
        Ok(())
    }
}

pub(crate) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}
