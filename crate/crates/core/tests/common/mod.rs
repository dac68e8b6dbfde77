//! Test-side oracles, independent of the library's tape and kernels.
#![allow(dead_code)] // each test binary uses a subset

use coteach_core::{Activation, Network, Tensor};

/// Forward pass of an MLP written from scratch for the tests: naive
/// triple-loop matmul, explicit bias add and activation, log-sum-exp
/// cross-entropy. Shares no code with the library path it checks.
pub fn reference_mean_ce_loss(net: &Network, x: &Tensor, labels: &[usize]) -> f64 {
    let n = x.rows();
    let mut h: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let n_layers = net.spec.layer_sizes.len() - 1;
    for l in 0..n_layers {
        let w = &net.parameters[2 * l];
        let b = &net.parameters[2 * l + 1];
        let (rows_in, cols_out) = (w.rows(), w.cols());
        let mut next: Vec<Vec<f64>> = Vec::with_capacity(n);
        for row in &h {
            let mut out = vec![0.0; cols_out];
            for (j, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in 0..rows_in {
                    acc += row[k] * w.data[k * cols_out + j];
                }
                *o = acc + b.data[j];
            }
            if l + 1 < n_layers {
                match net.spec.activation {
                    Activation::Relu => out.iter_mut().for_each(|v| {
                        if *v < 0.0 {
                            *v = 0.0
                        }
                    }),
                    Activation::LeakyRelu(s) => out.iter_mut().for_each(|v| {
                        if *v < 0.0 {
                            *v *= s
                        }
                    }),
                }
            }
            next.push(out);
        }
        h = next;
    }
    let mut total = 0.0;
    for (logits, &label) in h.iter().zip(labels) {
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - logits[label];
    }
    total / n as f64
}

/// Central finite difference of the reference loss with respect to one
/// parameter coordinate.
pub fn fd_gradient(
    net: &mut Network,
    x: &Tensor,
    labels: &[usize],
    param: usize,
    elem: usize,
    step: f64,
) -> f64 {
    let orig = net.parameters[param].data[elem];
    net.parameters[param].data[elem] = orig + step;
    let plus = reference_mean_ce_loss(net, x, labels);
    net.parameters[param].data[elem] = orig - step;
    let minus = reference_mean_ce_loss(net, x, labels);
    net.parameters[param].data[elem] = orig;
    (plus - minus) / (2.0 * step)
}

/// Relative error with an absolute floor for near-zero gradients.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}
