//! Gradient checking of random MLP loss graphs against central finite
//! differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{init_network, Activation, MlpSpec, Network, NetworkId};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub coords_checked: usize,
}

/// Relative error with a small absolute floor, so near-zero gradients do
/// not explode the ratio.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Mean cross-entropy of the batch, used as the finite-difference target.
fn loss_value(net: &Network, x: &Tensor, labels: &[usize]) -> Result<f64> {
    net.mean_loss(x, labels)
}

/// Compare analytic gradients of a randomly built MLP against central
/// finite differences at `coords` randomly sampled parameter coordinates.
pub fn check_random_mlp(seed: u64, coords: usize, fd_step: f64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input = rng.gen_range(3..8);
    let hidden = rng.gen_range(4..10);
    let classes = rng.gen_range(3..6);
    let batch = rng.gen_range(2..7);
    let layer_sizes = if rng.gen_bool(0.5) {
        vec![input, hidden, classes]
    } else {
        vec![input, hidden, rng.gen_range(4..8), classes]
    };
    let spec = MlpSpec::new(layer_sizes, Activation::LeakyRelu(0.01), rng.gen())?;
    let mut net = init_network(spec, NetworkId::F)?;

    let x = Tensor::new(
        vec![batch, input],
        (0..batch * input).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect(),
    )?;
    let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..classes)).collect();

    // analytic gradients
    let graph = net.ce_loss_graph(&x, &labels)?;
    let mut tape = graph.tape;
    let mean = tape.mean(graph.per_sample)?;
    tape.backward(mean)?;
    let analytic: Vec<Vec<f64>> = graph
        .param_ids
        .iter()
        .map(|&id| tape.grad(id).expect("params require grad").to_vec())
        .collect();

    let mut max_rel = 0.0f64;
    for _ in 0..coords {
        let pi = rng.gen_range(0..net.parameters.len());
        let ei = rng.gen_range(0..net.parameters[pi].numel());
        let orig = net.parameters[pi].data[ei];
        net.parameters[pi].data[ei] = orig + fd_step;
        let plus = loss_value(&net, &x, &labels)?;
        net.parameters[pi].data[ei] = orig - fd_step;
        let minus = loss_value(&net, &x, &labels)?;
        net.parameters[pi].data[ei] = orig;
        let numeric = (plus - minus) / (2.0 * fd_step);
        max_rel = max_rel.max(relative_error(analytic[pi][ei], numeric));
    }
    Ok(GradCheckReport {
        max_rel_err: max_rel,
        coords_checked: coords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_mlps_pass_the_finite_difference_check() {
        for seed in 0..5 {
            let report = check_random_mlp(seed, 50, 1e-5).unwrap();
            assert!(
                report.max_rel_err < 1e-4,
                "seed {seed}: max rel err {}",
                report.max_rel_err
            );
        }
    }
}
