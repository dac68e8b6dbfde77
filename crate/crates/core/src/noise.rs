//! Label-noise transition matrices and label corruption.
//!
//! Two matrix shapes are supported. Pair flipping sends class i to class
//! (i+1) mod n with probability ε; symmetry flipping spreads ε uniformly
//! over the other n−1 classes. Corruption samples each noisy label
//! independently from the row of its clean label, once, before training.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::seed::{derive, mix64, unit_f64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoiseKind {
    Pair,
    Symmetry,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Pair => "pair",
            NoiseKind::Symmetry => "symmetry",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(NoiseKind::Pair),
            "symmetry" => Ok(NoiseKind::Symmetry),
            other => Err(Error::Config(format!(
                "unknown noise kind {other:?} (expected \"pair\" or \"symmetry\")"
            ))),
        }
    }
}

/// Row-stochastic matrix with `rows[i*n + j] = Pr(noisy = j | clean = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    epsilon: f64,
    kind: NoiseKind,
    rows: Vec<f64>,
}

impl TransitionMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i * self.n + j]
    }

    /// Dense row-major copy, for feeding the matrix into a loss graph.
    pub fn to_vec(&self) -> Vec<f64> {
        self.rows.clone()
    }

    /// Sample a column from row `i` by inverse CDF at `u ∈ [0, 1)`.
    fn sample_row(&self, i: usize, u: f64) -> usize {
        let row = self.row(i);
        let mut cum = 0.0;
        for (j, &p) in row.iter().enumerate() {
            cum += p;
            if u < cum {
                return j;
            }
        }
        self.n - 1
    }
}

/// Build the transition matrix for a noise kind. Deterministic; the
/// diagonal is exactly 1−ε.
pub fn build_q(kind: NoiseKind, n: usize, epsilon: f64) -> Result<TransitionMatrix> {
    if n < 2 {
        return Err(Error::Domain(format!("transition matrix needs n ≥ 2, got {n}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "noise rate must lie in [0, 1), got {epsilon}"
        )));
    }
    let mut rows = vec![0.0; n * n];
    match kind {
        NoiseKind::Pair => {
            for i in 0..n {
                rows[i * n + i] = 1.0 - epsilon;
                rows[i * n + (i + 1) % n] = epsilon;
            }
        }
        NoiseKind::Symmetry => {
            let off = epsilon / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n {
                    rows[i * n + j] = if i == j { 1.0 - epsilon } else { off };
                }
            }
        }
    }
    Ok(TransitionMatrix {
        n,
        epsilon,
        kind,
        rows,
    })
}

/// How a dataset's labels are to be corrupted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub epsilon: f64,
    pub corruption_seed: u64,
}

impl NoiseSpec {
    /// Pair flipping at ε ≥ 0.5 means over half the labels are wrong and
    /// the task is unlearnable without extra assumptions. Worth a warning,
    /// not an error.
    pub fn pair_rate_exceeds_half(&self) -> bool {
        self.kind == NoiseKind::Pair && self.epsilon >= 0.5
    }
}

/// Draw a noisy label for every clean label, independently, from the
/// matching row of `q`. The draw for index i depends only on `(seed, i)`,
/// so the outcome is independent of processing order.
pub fn corrupt_labels(clean: &[usize], q: &TransitionMatrix, seed: u64) -> Result<Vec<usize>> {
    if let Some(&bad) = clean.iter().find(|&&y| y >= q.n()) {
        return Err(Error::Contract(format!(
            "label {bad} out of range for {} classes",
            q.n()
        )));
    }
    Ok(clean
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let u = unit_f64(mix64(derive(seed, i as u64)));
            q.sample_row(y, u)
        })
        .collect())
}
