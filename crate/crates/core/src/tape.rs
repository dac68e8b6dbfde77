//! Tape-based reverse-mode automatic differentiation.
//!
//! A [`Tape`] is rebuilt for every forward pass: ops evaluate eagerly,
//! record themselves as nodes, and [`Tape::backward`] replays the tape in
//! reverse, accumulating gradients additively wherever a node feeds more
//! than one consumer. Nodes are addressed by [`NodeId`], which is only
//! meaningful for the tape that issued it.

use crate::error::{Error, Result};
use crate::tensor::{ensure_finite, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul { lhs: NodeId, rhs: NodeId },
    Add { lhs: NodeId, rhs: NodeId },
    Relu { input: NodeId },
    LeakyRelu { input: NodeId, slope: f64 },
    LogSoftmaxRows { input: NodeId },
    SoftmaxRows { input: NodeId },
    GatherRows { input: NodeId, cols: Vec<usize> },
    Ln { input: NodeId },
    Sum { input: NodeId },
    Mean { input: NodeId },
    Scale { input: NodeId, factor: f64 },
}

impl Op {
    fn name(&self) -> &'static str {
        match self {
            Op::Leaf => "leaf",
            Op::MatMul { .. } => "matmul",
            Op::Add { .. } => "add_broadcast",
            Op::Relu { .. } => "relu",
            Op::LeakyRelu { .. } => "leaky_relu",
            Op::LogSoftmaxRows { .. } => "log_softmax_rows",
            Op::SoftmaxRows { .. } => "softmax_rows",
            Op::GatherRows { .. } => "gather_rows",
            Op::Ln { .. } => "ln",
            Op::Sum { .. } => "sum",
            Op::Mean { .. } => "mean",
            Op::Scale { .. } => "scale",
        }
    }
}

struct Node {
    op: Op,
    shape: Vec<usize>,
    data: Vec<f64>,
    requires_grad: bool,
    grad: Option<Vec<f64>>,
}

/// Eagerly evaluated computation graph with reverse-mode gradients.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    /// Register an input tensor as a leaf node.
    pub fn leaf(&mut self, t: &Tensor) -> Result<NodeId> {
        ensure_finite("leaf", &t.data)?;
        Ok(self.push(Op::Leaf, t.shape.clone(), t.data.clone(), t.requires_grad))
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].data
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        &self.nodes[id.0].shape
    }

    /// Gradient of the last `backward` target with respect to this node.
    pub fn grad(&self, id: NodeId) -> Option<&[f64]> {
        self.nodes[id.0].grad.as_deref()
    }

    pub fn scalar_value(&self, id: NodeId) -> f64 {
        self.nodes[id.0].data[0]
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, data: Vec<f64>, requires_grad: bool) -> NodeId {
        self.nodes.push(Node {
            op,
            shape,
            data,
            requires_grad,
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    fn check_finite(&self, op: &'static str, data: &[f64]) -> Result<()> {
        ensure_finite(op, data)
    }

    fn dims2(&self, op: &'static str, id: NodeId) -> Result<(usize, usize)> {
        let s = &self.nodes[id.0].shape;
        if s.len() != 2 {
            return Err(Error::shape(op, format!("need 2-D operand, got {s:?}")));
        }
        Ok((s[0], s[1]))
    }

    // ── forward ops ──────────────────────────────────────────────────

    /// 2-D matrix product `lhs (m×k) @ rhs (k×n)`.
    pub fn matmul(&mut self, lhs: NodeId, rhs: NodeId) -> Result<NodeId> {
        let (m, k) = self.dims2("matmul", lhs)?;
        let (k2, n) = self.dims2("matmul", rhs)?;
        if k != k2 {
            return Err(Error::shape(
                "matmul",
                format!("{:?} x {:?}", self.shape(lhs), self.shape(rhs)),
            ));
        }
        let out = matmul_2d(&self.nodes[lhs.0].data, &self.nodes[rhs.0].data, m, k, n);
        self.check_finite("matmul", &out)?;
        let rg = self.nodes[lhs.0].requires_grad || self.nodes[rhs.0].requires_grad;
        Ok(self.push(Op::MatMul { lhs, rhs }, vec![m, n], out, rg))
    }

    /// Elementwise add for equal shapes, or a row-broadcast bias add when
    /// `rhs` is a vector matching the column count of a 2-D `lhs`.
    pub fn add(&mut self, lhs: NodeId, rhs: NodeId) -> Result<NodeId> {
        let ls = self.nodes[lhs.0].shape.clone();
        let rs = self.nodes[rhs.0].shape.clone();
        let broadcast = ls.len() == 2 && rs.len() == 1 && rs[0] == ls[1];
        if ls != rs && !broadcast {
            return Err(Error::shape("add_broadcast", format!("{ls:?} + {rs:?}")));
        }
        let l = &self.nodes[lhs.0].data;
        let r = &self.nodes[rhs.0].data;
        let out = if broadcast {
            let cols = ls[1];
            let mut out = Vec::with_capacity(l.len());
            for (i, v) in l.iter().enumerate() {
                out.push(v + r[i % cols]);
            }
            out
        } else {
            l.iter().zip(r).map(|(a, b)| a + b).collect()
        };
        self.check_finite("add_broadcast", &out)?;
        let rg = self.nodes[lhs.0].requires_grad || self.nodes[rhs.0].requires_grad;
        Ok(self.push(Op::Add { lhs, rhs }, ls, out, rg))
    }

    pub fn relu(&mut self, input: NodeId) -> Result<NodeId> {
        let out: Vec<f64> = self.nodes[input.0].data.iter().map(|&x| x.max(0.0)).collect();
        let shape = self.nodes[input.0].shape.clone();
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::Relu { input }, shape, out, rg))
    }

    pub fn leaky_relu(&mut self, input: NodeId, slope: f64) -> Result<NodeId> {
        if !slope.is_finite() {
            return Err(Error::Numeric("leaky_relu slope must be finite".into()));
        }
        let out: Vec<f64> = self.nodes[input.0]
            .data
            .iter()
            .map(|&x| if x > 0.0 { x } else { slope * x })
            .collect();
        let shape = self.nodes[input.0].shape.clone();
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::LeakyRelu { input, slope }, shape, out, rg))
    }

    /// Row-wise log-softmax of a 2-D tensor, stabilized by max subtraction.
    pub fn log_softmax_rows(&mut self, input: NodeId) -> Result<NodeId> {
        let (n, c) = self.dims2("log_softmax_rows", input)?;
        let mut out = self.nodes[input.0].data.clone();
        log_softmax_rows_inplace(&mut out, n, c);
        self.check_finite("log_softmax_rows", &out)?;
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::LogSoftmaxRows { input }, vec![n, c], out, rg))
    }

    /// Row-wise softmax of a 2-D tensor.
    pub fn softmax_rows(&mut self, input: NodeId) -> Result<NodeId> {
        let (n, c) = self.dims2("softmax_rows", input)?;
        let mut out = self.nodes[input.0].data.clone();
        log_softmax_rows_inplace(&mut out, n, c);
        out.iter_mut().for_each(|v| *v = v.exp());
        self.check_finite("softmax_rows", &out)?;
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::SoftmaxRows { input }, vec![n, c], out, rg))
    }

    /// Per-row element pick: `out[i] = input[i, cols[i]]`.
    pub fn gather_rows(&mut self, input: NodeId, cols: &[usize]) -> Result<NodeId> {
        let (n, c) = self.dims2("gather_rows", input)?;
        if cols.len() != n {
            return Err(Error::shape(
                "gather_rows",
                format!("{n} rows but {} indices", cols.len()),
            ));
        }
        if let Some(&bad) = cols.iter().find(|&&j| j >= c) {
            return Err(Error::Contract(format!(
                "gather_rows: column {bad} out of range for {c} columns"
            )));
        }
        let data = &self.nodes[input.0].data;
        let out: Vec<f64> = cols.iter().enumerate().map(|(i, &j)| data[i * c + j]).collect();
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::GatherRows { input, cols: cols.to_vec() }, vec![n], out, rg))
    }

    /// Elementwise natural log. Non-positive inputs surface as numeric errors.
    pub fn ln(&mut self, input: NodeId) -> Result<NodeId> {
        let out: Vec<f64> = self.nodes[input.0].data.iter().map(|&x| x.ln()).collect();
        self.check_finite("ln", &out)?;
        let shape = self.nodes[input.0].shape.clone();
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::Ln { input }, shape, out, rg))
    }

    /// Reduce all elements to a scalar sum.
    pub fn sum(&mut self, input: NodeId) -> Result<NodeId> {
        let s: f64 = self.nodes[input.0].data.iter().sum();
        self.check_finite("sum", &[s])?;
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::Sum { input }, vec![1], vec![s], rg))
    }

    /// Reduce all elements to their scalar mean.
    pub fn mean(&mut self, input: NodeId) -> Result<NodeId> {
        let n = self.nodes[input.0].data.len();
        if n == 0 {
            return Err(Error::Contract("mean of an empty tensor".into()));
        }
        let s: f64 = self.nodes[input.0].data.iter().sum::<f64>() / n as f64;
        self.check_finite("mean", &[s])?;
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::Mean { input }, vec![1], vec![s], rg))
    }

    /// Multiply every element by a constant.
    pub fn scale(&mut self, input: NodeId, factor: f64) -> Result<NodeId> {
        if !factor.is_finite() {
            return Err(Error::Numeric("scale factor must be finite".into()));
        }
        let out: Vec<f64> = self.nodes[input.0].data.iter().map(|&x| factor * x).collect();
        self.check_finite("scale", &out)?;
        let shape = self.nodes[input.0].shape.clone();
        let rg = self.nodes[input.0].requires_grad;
        Ok(self.push(Op::Scale { input, factor }, shape, out, rg))
    }

    // ── backward ─────────────────────────────────────────────────────

    /// Populate gradients of every grad-requiring node reachable from
    /// `loss`, which must be scalar.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if self.nodes[loss.0].data.len() != 1 {
            return Err(Error::Contract(format!(
                "backward target must be scalar, got shape {:?}",
                self.nodes[loss.0].shape
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);

        for id in (0..=loss.0).rev() {
            let Some(out_grad) = grads[id].take() else { continue };
            if out_grad.iter().any(|v| v.is_nan()) {
                return Err(Error::Numeric(format!(
                    "NaN gradient at node {id} ({})",
                    self.nodes[id].op.name()
                )));
            }
            let op = self.nodes[id].op.clone();
            match op {
                Op::Leaf => {}
                Op::MatMul { lhs, rhs } => {
                    let (m, k) = (self.nodes[lhs.0].shape[0], self.nodes[lhs.0].shape[1]);
                    let n = self.nodes[rhs.0].shape[1];
                    if self.nodes[lhs.0].requires_grad {
                        // dL = dOut @ Rᵀ
                        let rt = transpose(&self.nodes[rhs.0].data, k, n);
                        let d = matmul_2d(&out_grad, &rt, m, n, k);
                        accumulate(&mut grads, lhs, d);
                    }
                    if self.nodes[rhs.0].requires_grad {
                        // dR = Lᵀ @ dOut
                        let lt = transpose(&self.nodes[lhs.0].data, m, k);
                        let d = matmul_2d(&lt, &out_grad, k, m, n);
                        accumulate(&mut grads, rhs, d);
                    }
                }
                Op::Add { lhs, rhs } => {
                    if self.nodes[lhs.0].requires_grad {
                        accumulate(&mut grads, lhs, out_grad.clone());
                    }
                    if self.nodes[rhs.0].requires_grad {
                        let rn = self.nodes[rhs.0].data.len();
                        if rn == out_grad.len() {
                            accumulate(&mut grads, rhs, out_grad.clone());
                        } else {
                            // bias add: column-sum the upstream gradient
                            let mut d = vec![0.0; rn];
                            for (i, g) in out_grad.iter().enumerate() {
                                d[i % rn] += g;
                            }
                            accumulate(&mut grads, rhs, d);
                        }
                    }
                }
                Op::Relu { input } => {
                    if self.nodes[input.0].requires_grad {
                        let x = &self.nodes[input.0].data;
                        let d: Vec<f64> = x
                            .iter()
                            .zip(&out_grad)
                            .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
                            .collect();
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::LeakyRelu { input, slope } => {
                    if self.nodes[input.0].requires_grad {
                        let x = &self.nodes[input.0].data;
                        let d: Vec<f64> = x
                            .iter()
                            .zip(&out_grad)
                            .map(|(&x, &g)| if x > 0.0 { g } else { slope * g })
                            .collect();
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::LogSoftmaxRows { input } => {
                    if self.nodes[input.0].requires_grad {
                        let (n, c) = (self.nodes[id].shape[0], self.nodes[id].shape[1]);
                        let y = &self.nodes[id].data;
                        let mut d = vec![0.0; n * c];
                        for r in 0..n {
                            let row = r * c;
                            let gsum: f64 = out_grad[row..row + c].iter().sum();
                            for j in 0..c {
                                d[row + j] = out_grad[row + j] - y[row + j].exp() * gsum;
                            }
                        }
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::SoftmaxRows { input } => {
                    if self.nodes[input.0].requires_grad {
                        let (n, c) = (self.nodes[id].shape[0], self.nodes[id].shape[1]);
                        let p = &self.nodes[id].data;
                        let mut d = vec![0.0; n * c];
                        for r in 0..n {
                            let row = r * c;
                            let dot: f64 =
                                (0..c).map(|j| out_grad[row + j] * p[row + j]).sum();
                            for j in 0..c {
                                d[row + j] = p[row + j] * (out_grad[row + j] - dot);
                            }
                        }
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::GatherRows { input, cols } => {
                    if self.nodes[input.0].requires_grad {
                        let c = self.nodes[input.0].shape[1];
                        let mut d = vec![0.0; self.nodes[input.0].data.len()];
                        for (i, &j) in cols.iter().enumerate() {
                            d[i * c + j] += out_grad[i];
                        }
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::Ln { input } => {
                    if self.nodes[input.0].requires_grad {
                        let x = &self.nodes[input.0].data;
                        let d: Vec<f64> =
                            x.iter().zip(&out_grad).map(|(&x, &g)| g / x).collect();
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::Sum { input } => {
                    if self.nodes[input.0].requires_grad {
                        let d = vec![out_grad[0]; self.nodes[input.0].data.len()];
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::Mean { input } => {
                    if self.nodes[input.0].requires_grad {
                        let n = self.nodes[input.0].data.len();
                        let d = vec![out_grad[0] / n as f64; n];
                        accumulate(&mut grads, input, d);
                    }
                }
                Op::Scale { input, factor } => {
                    if self.nodes[input.0].requires_grad {
                        let d: Vec<f64> = out_grad.iter().map(|&g| factor * g).collect();
                        accumulate(&mut grads, input, d);
                    }
                }
            }
            if self.nodes[id].requires_grad {
                self.nodes[id].grad = Some(out_grad);
            }
        }
        Ok(())
    }
}

fn accumulate(grads: &mut [Option<Vec<f64>>], target: NodeId, d: Vec<f64>) {
    match &mut grads[target.0] {
        Some(buf) => {
            for (b, v) in buf.iter_mut().zip(&d) {
                *b += v;
            }
        }
        slot => *slot = Some(d),
    }
}

/// Row-major `a (m×k) @ b (k×n)`, accumulating along k in the inner loop
/// so both operands stream sequentially.
pub(crate) fn matmul_2d(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
    out
}

pub(crate) fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

/// In-place row-wise log-softmax with max subtraction, for an n×c buffer.
pub(crate) fn log_softmax_rows_inplace(data: &mut [f64], n: usize, c: usize) {
    for r in 0..n {
        let row = &mut data[r * c..(r + 1) * c];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter() {
            sum += (v - max).exp();
        }
        let lse = max + sum.ln();
        for v in row.iter_mut() {
            *v -= lse;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(tape: &mut Tape, shape: Vec<usize>, data: Vec<f64>, rg: bool) -> NodeId {
        let mut t = Tensor::new(shape, data).unwrap();
        t.requires_grad = rg;
        tape.leaf(&t).unwrap()
    }

    #[test]
    fn relu_clamps_negatives() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![3], vec![-1.0, 0.0, 2.0], false);
        let y = tape.relu(x).unwrap();
        assert_eq!(tape.value(y), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn leaky_relu_uses_slope_on_negatives() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![2], vec![-1.0, 2.0], false);
        let y = tape.leaky_relu(x, 0.01).unwrap();
        assert_eq!(tape.value(y), &[-0.01, 2.0]);
    }

    #[test]
    fn matmul_zero_annihilates() {
        let mut tape = Tape::new();
        let a = leaf(&mut tape, vec![2, 3], vec![0.0; 6], false);
        let b = leaf(&mut tape, vec![3, 4], (1..=12).map(f64::from).collect(), false);
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.shape(c), &[2, 4]);
        assert!(tape.value(c).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matmul_shape_mismatch_names_op_and_shapes() {
        let mut tape = Tape::new();
        let a = leaf(&mut tape, vec![2, 3], vec![0.0; 6], false);
        let b = leaf(&mut tape, vec![4, 2], vec![0.0; 8], false);
        let err = tape.matmul(a, b).unwrap_err().to_string();
        assert!(err.contains("matmul"), "{err}");
        assert!(err.contains("[2, 3]") && err.contains("[4, 2]"), "{err}");
    }

    #[test]
    fn sum_backward_is_ones() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![3], vec![1.0, 2.0, 3.0], true);
        let s = tape.sum(x).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn mean_of_square_backward_matches_hand_derivative() {
        // loss = mean(x∘x) for x=[1,2], written as 0.5·(x@xᵀ) with the
        // vector entering as both matmul operands. The gradient wrt x is
        // the sum over both occurrences and equals x itself.
        let mut tape = Tape::new();
        let row = leaf(&mut tape, vec![1, 2], vec![1.0, 2.0], true);
        let col = leaf(&mut tape, vec![2, 1], vec![1.0, 2.0], true);
        let prod = tape.matmul(row, col).unwrap();
        let loss = tape.scale(prod, 0.5).unwrap();
        tape.backward(loss).unwrap();
        let total: Vec<f64> = tape
            .grad(row)
            .unwrap()
            .iter()
            .zip(tape.grad(col).unwrap())
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(total, vec![1.0, 2.0]);
    }

    #[test]
    fn two_consumers_accumulate() {
        // y = sum(x) + mean(x): dy/dx_i = 1 + 1/3
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![3], vec![5.0, -2.0, 0.5], true);
        let s = tape.sum(x).unwrap();
        let m = tape.mean(x).unwrap();
        let y = tape.add(s, m).unwrap();
        tape.backward(y).unwrap();
        let expect = 1.0 + 1.0 / 3.0;
        for &g in tape.grad(x).unwrap() {
            assert!((g - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_rejects_non_scalar_loss() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![2], vec![1.0, 2.0], true);
        assert!(matches!(tape.backward(x), Err(Error::Contract(_))));
    }

    #[test]
    fn log_softmax_rows_is_stable_for_large_logits() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1, 3], vec![1000.0, 0.0, -1000.0], false);
        let y = tape.log_softmax_rows(x).unwrap();
        let v = tape.value(y);
        assert!(v.iter().all(|v| v.is_finite()));
        assert!((v[0] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn gather_rows_picks_one_entry_per_row() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], true);
        let g = tape.gather_rows(x, &[2, 0]).unwrap();
        assert_eq!(tape.value(g), &[3.0, 4.0]);
        let s = tape.sum(g).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn gather_rows_rejects_out_of_range_column() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![1, 2], vec![1.0, 2.0], false);
        assert!(matches!(
            tape.gather_rows(x, &[2]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn ln_of_nonpositive_is_a_numeric_error() {
        let mut tape = Tape::new();
        let x = leaf(&mut tape, vec![2], vec![1.0, 0.0], false);
        assert!(matches!(tape.ln(x), Err(Error::Numeric(_))));
    }

    #[test]
    fn bias_add_broadcasts_rows_and_column_sums_gradient() {
        let mut tape = Tape::new();
        let m = leaf(&mut tape, vec![2, 2], vec![1.0, 2.0, 3.0, 4.0], false);
        let b = leaf(&mut tape, vec![2], vec![10.0, 20.0], true);
        let y = tape.add(m, b).unwrap();
        assert_eq!(tape.value(y), &[11.0, 22.0, 13.0, 24.0]);
        let s = tape.sum(y).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(b).unwrap(), &[2.0, 2.0]);
    }
}
