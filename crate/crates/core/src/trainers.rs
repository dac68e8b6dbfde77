//! The six training paradigms over one shared epoch/mini-batch driver.
//!
//! Standard trains on every noisy label. Bootstrap blends the noisy label
//! with the network's own hard prediction. Forward correction multiplies
//! predicted probabilities by the oracle transition matrix before the
//! log-loss. Decoupling updates both networks only on disagreement
//! samples. Self-paced keeps each mini-batch's small-loss fraction for
//! its own update; co-teaching computes the same selections but feeds
//! each network the subset chosen by its peer.
//!
//! Selections always come from pre-update parameters: both networks pick
//! first, then both update.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::adam::{zero_grads, AdamConfig, AdamState};
use crate::data::{LabeledData, NoisyDataset, TrainBatch};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_accuracy, label_precision};
use crate::model::{LossGraph, Network, NetworkId};
use crate::noise::TransitionMatrix;
use crate::schedule::{kept_count, kept_fraction, ScheduleParams};
use crate::seed::derive;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Paradigm {
    Standard,
    Bootstrap,
    FCorrection,
    Decoupling,
    SelfPaced,
    CoTeaching,
}

impl Paradigm {
    pub const ALL: [Paradigm; 6] = [
        Paradigm::Standard,
        Paradigm::Bootstrap,
        Paradigm::FCorrection,
        Paradigm::Decoupling,
        Paradigm::SelfPaced,
        Paradigm::CoTeaching,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::Standard => "standard",
            Paradigm::Bootstrap => "bootstrap",
            Paradigm::FCorrection => "f-correction",
            Paradigm::Decoupling => "decoupling",
            Paradigm::SelfPaced => "self-paced",
            Paradigm::CoTeaching => "co-teaching",
        }
    }

    /// Does the paradigm maintain a second network?
    pub fn is_dual(self) -> bool {
        matches!(self, Paradigm::Decoupling | Paradigm::CoTeaching)
    }

    /// Does the paradigm select a subset of each mini-batch?
    pub fn is_selecting(self) -> bool {
        matches!(
            self,
            Paradigm::Decoupling | Paradigm::SelfPaced | Paradigm::CoTeaching
        )
    }
}

impl std::str::FromStr for Paradigm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Paradigm::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Paradigm::ALL.iter().map(|p| p.as_str()).collect();
                Error::Config(format!("unknown paradigm {s:?} (expected one of {names:?})"))
            })
    }
}

impl std::fmt::Display for Paradigm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub paradigm: Paradigm,
    pub batch_size: usize,
    pub epochs: usize,
    pub schedule: ScheduleParams,
    pub adam: AdamConfig,
    pub shuffle_seed: u64,
    /// Weight on the noisy label in the bootstrap loss; required exactly
    /// when the paradigm is Bootstrap.
    pub bootstrap_beta: Option<f64>,
    /// Oracle transition matrix; required exactly when the paradigm is
    /// FCorrection.
    pub oracle_q: Option<TransitionMatrix>,
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        self.schedule.validate()?;
        self.adam.validate()?;
        match (self.paradigm, self.bootstrap_beta) {
            (Paradigm::Bootstrap, None) => {
                return Err(Error::Config("bootstrap paradigm needs bootstrap_beta".into()))
            }
            (Paradigm::Bootstrap, Some(b)) if !(b > 0.0 && b <= 1.0) => {
                return Err(Error::Config(format!(
                    "bootstrap_beta must lie in (0, 1], got {b}"
                )))
            }
            (p, Some(_)) if p != Paradigm::Bootstrap => {
                return Err(Error::Config(format!(
                    "bootstrap_beta is only valid for bootstrap, not {p}"
                )))
            }
            _ => {}
        }
        match (self.paradigm, &self.oracle_q) {
            (Paradigm::FCorrection, None) => {
                return Err(Error::Config("f-correction paradigm needs oracle_q".into()))
            }
            (p, Some(_)) if p != Paradigm::FCorrection => {
                return Err(Error::Config(format!(
                    "oracle_q is only valid for f-correction, not {p}"
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Which instances a network kept in one mini-batch. `kept_clean_count`
/// is filled on the metrics path, where clean labels are visible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionRecord {
    pub epoch: usize,
    pub batch_index: usize,
    pub network_id: NetworkId,
    /// Dataset indices of the kept instances.
    pub kept_indices: Vec<usize>,
    pub kept_clean_count: usize,
}

/// Bookkeeping returned by every paradigm step.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    /// Number of per-sample losses that entered updates.
    pub used: usize,
    /// Sum of those per-sample losses (at pre-update parameters).
    pub loss_sum: f64,
}

/// Per-epoch metrics row.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub test_accuracy_f: f64,
    pub test_accuracy_g: Option<f64>,
    /// Clean fraction of the instances whose labels the paradigm trusted
    /// this epoch: the pooled small-loss selections for self-paced and
    /// co-teaching, the whole epoch (keep-all base rate) for decoupling,
    /// absent for non-selecting paradigms.
    pub label_precision_f: Option<f64>,
    pub label_precision_g: Option<f64>,
    pub kept_fraction: f64,
    /// Mean training loss over all instances used for updates this epoch;
    /// absent when nothing was updated (e.g. decoupling with no
    /// disagreements).
    pub mean_kept_loss: Option<f64>,
}

/// Positions of the `count` smallest losses, ties broken by ascending
/// position, result sorted by position.
pub fn select_small_loss(losses: &[f64], count: usize) -> Result<Vec<usize>> {
    if count > losses.len() {
        return Err(Error::Contract(format!(
            "cannot select {count} of {} losses",
            losses.len()
        )));
    }
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&a, &b| {
        losses[a]
            .total_cmp(&losses[b])
            .then_with(|| a.cmp(&b))
    });
    let mut picked = order[..count].to_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Reduce a recorded loss graph to its mean, backpropagate, harvest the
/// parameter gradients, and take one Adam step. Returns the mean loss.
fn apply_update(net: &mut Network, adam: &mut AdamState, graph: LossGraph) -> Result<f64> {
    let LossGraph {
        mut tape,
        param_ids,
        per_sample,
        ..
    } = graph;
    let mean = tape.mean(per_sample)?;
    let loss = tape.scalar_value(mean);
    tape.backward(mean)?;
    for (param, id) in net.parameters.iter_mut().zip(&param_ids) {
        if let Some(g) = tape.grad(*id) {
            param.accumulate_grad(g)?;
        } else {
            return Err(Error::Contract("parameter missing from backward pass".into()));
        }
    }
    adam.step(&mut net.parameters)?;
    zero_grads(&mut net.parameters);
    Ok(loss)
}

/// Plain cross-entropy on the full mini-batch.
pub fn standard_step(net: &mut Network, adam: &mut AdamState, batch: &TrainBatch) -> Result<StepStats> {
    let graph = net.ce_loss_graph(&batch.x, &batch.noisy_labels)?;
    let loss = apply_update(net, adam, graph)?;
    Ok(StepStats {
        used: batch.len(),
        loss_sum: loss * batch.len() as f64,
    })
}

/// Record the bootstrap-hard loss graph: per-sample loss
/// β·CE(p, noisy) + (1−β)·CE(p, argmax p), with the hard targets taken
/// from the current forward pass (detached).
pub fn bootstrap_loss_graph(net: &Network, batch: &TrainBatch, beta: f64) -> Result<LossGraph> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Config(format!(
            "bootstrap beta must lie in (0, 1], got {beta}"
        )));
    }
    let mut graph = net.ce_loss_graph(&batch.x, &batch.noisy_labels)?;
    let c = net.n_classes();
    let logits = graph.tape.value(graph.logits);
    let hard: Vec<usize> = (0..batch.len())
        .map(|i| crate::model::argmax(&logits[i * c..(i + 1) * c]))
        .collect();
    // ce_loss_graph appended log_softmax → gather(noisy) → scale(−1);
    // reuse its per-sample node as the noisy-label term.
    let log_probs = graph.tape.log_softmax_rows(graph.logits)?;
    let picked_hard = graph.tape.gather_rows(log_probs, &hard)?;
    let noisy_term = graph.tape.scale(graph.per_sample, beta)?;
    let hard_term = graph.tape.scale(picked_hard, -(1.0 - beta))?;
    let combined = graph.tape.add(noisy_term, hard_term)?;
    graph.per_sample = combined;
    Ok(graph)
}

pub fn bootstrap_step(
    net: &mut Network,
    adam: &mut AdamState,
    batch: &TrainBatch,
    beta: f64,
) -> Result<StepStats> {
    let graph = bootstrap_loss_graph(net, batch, beta)?;
    let loss = apply_update(net, adam, graph)?;
    Ok(StepStats {
        used: batch.len(),
        loss_sum: loss * batch.len() as f64,
    })
}

/// Record the forward-corrected loss graph: per-sample loss
/// −log((Qᵀ p)[noisy]) with p the softmax of the logits.
pub fn fcorrection_loss_graph(
    net: &Network,
    batch: &TrainBatch,
    q: &TransitionMatrix,
) -> Result<LossGraph> {
    if q.n() != net.n_classes() {
        return Err(Error::Contract(format!(
            "transition matrix is {0}x{0} but network has {1} classes",
            q.n(),
            net.n_classes()
        )));
    }
    let mut graph = net.ce_loss_graph(&batch.x, &batch.noisy_labels)?;
    let probs = graph.tape.softmax_rows(graph.logits)?;
    // (Qᵀ p_i)[j] for all i, j at once: P (n×c) @ Q (c×c).
    let q_leaf = graph.tape.leaf(&Tensor::new(vec![q.n(), q.n()], q.to_vec())?)?;
    let corrected = graph.tape.matmul(probs, q_leaf)?;
    let picked = graph.tape.gather_rows(corrected, &batch.noisy_labels)?;
    if let Some(&bad) = graph.tape.value(picked).iter().find(|&&v| v <= 0.0) {
        return Err(Error::Numeric(format!(
            "forward-corrected probability {bad} is not positive"
        )));
    }
    let logs = graph.tape.ln(picked)?;
    graph.per_sample = graph.tape.scale(logs, -1.0)?;
    Ok(graph)
}

pub fn fcorrection_step(
    net: &mut Network,
    adam: &mut AdamState,
    batch: &TrainBatch,
    q: &TransitionMatrix,
) -> Result<StepStats> {
    let graph = fcorrection_loss_graph(net, batch, q)?;
    let loss = apply_update(net, adam, graph)?;
    Ok(StepStats {
        used: batch.len(),
        loss_sum: loss * batch.len() as f64,
    })
}

fn selection_record(batch: &TrainBatch, net: NetworkId, positions: &[usize]) -> SelectionRecord {
    SelectionRecord {
        epoch: batch.epoch,
        batch_index: batch.batch_index,
        network_id: net,
        kept_indices: positions.iter().map(|&p| batch.dataset_indices[p]).collect(),
        kept_clean_count: 0,
    }
}

/// One self-paced step: keep the small-loss fraction of the batch and
/// update on it.
pub fn selfpaced_step(
    net: &mut Network,
    adam: &mut AdamState,
    batch: &TrainBatch,
    fraction: f64,
) -> Result<(SelectionRecord, StepStats)> {
    let count = kept_count(batch.len(), fraction)?;
    let losses = net.per_sample_losses(&batch.x, &batch.noisy_labels)?;
    let picks = select_small_loss(&losses, count)?;
    let record = selection_record(batch, net.id, &picks);
    let sub = batch.subset(&picks)?;
    let graph = net.ce_loss_graph(&sub.x, &sub.noisy_labels)?;
    let loss = apply_update(net, adam, graph)?;
    Ok((
        record,
        StepStats {
            used: count,
            loss_sum: loss * count as f64,
        },
    ))
}

/// One co-teaching step. Both networks rank the batch by their own
/// per-sample losses at pre-update parameters; then f updates on g's
/// selection and g on f's.
pub fn coteaching_step(
    net_f: &mut Network,
    adam_f: &mut AdamState,
    net_g: &mut Network,
    adam_g: &mut AdamState,
    batch: &TrainBatch,
    fraction: f64,
) -> Result<(SelectionRecord, SelectionRecord, StepStats)> {
    if batch.is_empty() {
        return Err(Error::Contract("co-teaching step on an empty batch".into()));
    }
    let count = kept_count(batch.len(), fraction)?;
    let losses_f = net_f.per_sample_losses(&batch.x, &batch.noisy_labels)?;
    let losses_g = net_g.per_sample_losses(&batch.x, &batch.noisy_labels)?;
    let picks_f = select_small_loss(&losses_f, count)?;
    let picks_g = select_small_loss(&losses_g, count)?;
    let record_f = selection_record(batch, NetworkId::F, &picks_f);
    let record_g = selection_record(batch, NetworkId::G, &picks_g);

    // cross update: each network learns from its peer's selection
    let sub_g = batch.subset(&picks_g)?;
    let sub_f = batch.subset(&picks_f)?;
    let graph_f = net_f.ce_loss_graph(&sub_g.x, &sub_g.noisy_labels)?;
    let loss_f = apply_update(net_f, adam_f, graph_f)?;
    let graph_g = net_g.ce_loss_graph(&sub_f.x, &sub_f.noisy_labels)?;
    let loss_g = apply_update(net_g, adam_g, graph_g)?;

    Ok((
        record_f,
        record_g,
        StepStats {
            used: 2 * count,
            loss_sum: (loss_f + loss_g) * count as f64,
        },
    ))
}

/// One decoupling step: both networks update on their own loss over the
/// samples where their argmax predictions differ; no disagreement, no
/// update.
pub fn decoupling_step(
    net_f: &mut Network,
    adam_f: &mut AdamState,
    net_g: &mut Network,
    adam_g: &mut AdamState,
    batch: &TrainBatch,
) -> Result<(SelectionRecord, SelectionRecord, StepStats)> {
    let preds_f = net_f.predict(&batch.x)?;
    let preds_g = net_g.predict(&batch.x)?;
    let disagree: Vec<usize> = (0..batch.len())
        .filter(|&i| preds_f[i] != preds_g[i])
        .collect();
    let record_f = selection_record(batch, NetworkId::F, &disagree);
    let record_g = selection_record(batch, NetworkId::G, &disagree);
    if disagree.is_empty() {
        return Ok((record_f, record_g, StepStats::default()));
    }
    let sub = batch.subset(&disagree)?;
    let graph_f = net_f.ce_loss_graph(&sub.x, &sub.noisy_labels)?;
    let loss_f = apply_update(net_f, adam_f, graph_f)?;
    let graph_g = net_g.ce_loss_graph(&sub.x, &sub.noisy_labels)?;
    let loss_g = apply_update(net_g, adam_g, graph_g)?;
    Ok((
        record_f,
        record_g,
        StepStats {
            used: 2 * disagree.len(),
            loss_sum: (loss_f + loss_g) * disagree.len() as f64,
        },
    ))
}

/// Outcome of a full training run.
#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub records: Vec<EpochRecord>,
    pub net_f: Network,
    pub net_g: Option<Network>,
}

/// Drive `epochs` epochs of the configured paradigm: shuffle with a
/// per-epoch derived seed, walk ceil(N/batch) mini-batches, refresh the
/// kept fraction once per epoch, and evaluate after each epoch. Fully
/// deterministic given the seeds.
pub fn run_training(
    config: &TrainerConfig,
    mut net_f: Network,
    mut net_g: Option<Network>,
    data: &NoisyDataset,
    eval: &LabeledData,
) -> Result<TrainingRun> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Contract("training dataset is empty".into()));
    }
    if data.n_classes != net_f.n_classes() || eval.n_classes > net_f.n_classes() {
        return Err(Error::Contract(format!(
            "class counts disagree: data {}, eval {}, network {}",
            data.n_classes,
            eval.n_classes,
            net_f.n_classes()
        )));
    }
    if config.paradigm.is_dual() != net_g.is_some() {
        return Err(Error::Contract(format!(
            "paradigm {} {} a second network",
            config.paradigm,
            if config.paradigm.is_dual() { "requires" } else { "does not take" }
        )));
    }
    if let Some(q) = &config.oracle_q {
        if q.n() != data.n_classes {
            return Err(Error::Contract(
                "oracle transition matrix does not match class count".into(),
            ));
        }
    }

    let n = data.len();
    let n_batches = n.div_ceil(config.batch_size);
    let mut adam_f = AdamState::new(config.adam.clone(), &net_f.parameters)?;
    let mut adam_g = match &net_g {
        Some(g) => Some(AdamState::new(config.adam.clone(), &g.parameters)?),
        None => None,
    };

    let mut records = Vec::with_capacity(config.epochs);
    for epoch in 1..=config.epochs {
        let fraction = kept_fraction(epoch, &config.schedule)?;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive(config.shuffle_seed, epoch as u64));
        order.shuffle(&mut rng);

        let mut selections: Vec<SelectionRecord> = Vec::new();
        let mut used_total = 0usize;
        let mut loss_total = 0.0f64;

        for batch_index in 0..n_batches {
            let lo = batch_index * config.batch_size;
            let hi = (lo + config.batch_size).min(n);
            let batch = data.train_batch(epoch, batch_index, &order[lo..hi])?;
            let stats = match config.paradigm {
                Paradigm::Standard => standard_step(&mut net_f, &mut adam_f, &batch)?,
                Paradigm::Bootstrap => bootstrap_step(
                    &mut net_f,
                    &mut adam_f,
                    &batch,
                    config.bootstrap_beta.expect("validated"),
                )?,
                Paradigm::FCorrection => fcorrection_step(
                    &mut net_f,
                    &mut adam_f,
                    &batch,
                    config.oracle_q.as_ref().expect("validated"),
                )?,
                Paradigm::SelfPaced => {
                    let (rec, stats) = selfpaced_step(&mut net_f, &mut adam_f, &batch, fraction)?;
                    selections.push(rec);
                    stats
                }
                Paradigm::CoTeaching => {
                    let g = net_g.as_mut().expect("validated");
                    let ag = adam_g.as_mut().expect("validated");
                    let (rf, rg, stats) =
                        coteaching_step(&mut net_f, &mut adam_f, g, ag, &batch, fraction)?;
                    selections.push(rf);
                    selections.push(rg);
                    stats
                }
                Paradigm::Decoupling => {
                    let g = net_g.as_mut().expect("validated");
                    let ag = adam_g.as_mut().expect("validated");
                    let (rf, rg, stats) =
                        decoupling_step(&mut net_f, &mut adam_f, g, ag, &batch)?;
                    selections.push(rf);
                    selections.push(rg);
                    stats
                }
            };
            used_total += stats.used;
            loss_total += stats.loss_sum;
        }

        // metrics path: clean labels come out only here
        for rec in &mut selections {
            rec.kept_clean_count = rec
                .kept_indices
                .iter()
                .filter(|&&i| data.clean_labels[i] == data.noisy_labels[i])
                .count();
        }

        let test_accuracy_f = evaluate_accuracy(&net_f, eval)?;
        let test_accuracy_g = match &net_g {
            Some(g) => Some(evaluate_accuracy(g, eval)?),
            None => None,
        };
        // Decoupling gates *when* to update but never filters labels, so
        // its trusted set is the whole batch and its precision is the
        // keep-all base rate. (The disagreement sets themselves are in
        // the SelectionRecords.)
        let (label_precision_f, label_precision_g) = match config.paradigm {
            Paradigm::Decoupling => {
                let base = Some(1.0 - data.realized_noise_rate);
                (base, base)
            }
            p if p.is_selecting() => (
                label_precision(&selections, NetworkId::F),
                if p.is_dual() {
                    label_precision(&selections, NetworkId::G)
                } else {
                    None
                },
            ),
            _ => (None, None),
        };

        records.push(EpochRecord {
            epoch,
            test_accuracy_f,
            test_accuracy_g,
            label_precision_f,
            label_precision_g,
            kept_fraction: fraction,
            mean_kept_loss: (used_total > 0).then(|| loss_total / used_total as f64),
        });
    }

    Ok(TrainingRun {
        records,
        net_f,
        net_g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{attach_noise, make_blobs};
    use crate::model::{init_network, Activation, MlpSpec};
    use crate::noise::{build_q, NoiseKind, NoiseSpec};

    fn tiny_net(seed: u64, id: NetworkId) -> Network {
        let spec = MlpSpec::new(vec![2, 8, 3], Activation::default(), seed).unwrap();
        init_network(spec, id).unwrap()
    }

    fn batch_of(x: Vec<f64>, rows: usize, labels: Vec<usize>) -> TrainBatch {
        TrainBatch {
            epoch: 1,
            batch_index: 0,
            x: Tensor::new(vec![rows, x.len() / rows], x).unwrap(),
            dataset_indices: (0..rows).collect(),
            noisy_labels: labels,
        }
    }

    #[test]
    fn select_small_loss_basic_and_ties() {
        assert_eq!(select_small_loss(&[0.1, 2.0, 0.5, 0.05], 2).unwrap(), vec![0, 3]);
        assert_eq!(
            select_small_loss(&[0.1, 2.0, 0.5], 3).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(select_small_loss(&[1.0, 1.0, 1.0], 2).unwrap(), vec![0, 1]);
        assert!(select_small_loss(&[1.0], 2).is_err());
    }

    #[test]
    fn select_small_loss_matches_brute_force() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let len = rng.gen_range(1..40);
            // quantized values force plenty of ties
            let losses: Vec<f64> = (0..len).map(|_| (rng.gen_range(0..8) as f64) / 4.0).collect();
            let count = rng.gen_range(1..=len);
            let fast = select_small_loss(&losses, count).unwrap();
            let mut order: Vec<usize> = (0..len).collect();
            order.sort_by(|&a, &b| losses[a].total_cmp(&losses[b]).then(a.cmp(&b)));
            let mut slow = order[..count].to_vec();
            slow.sort_unstable();
            assert_eq!(fast, slow);
            let max_sel = fast.iter().map(|&i| losses[i]).fold(f64::MIN, f64::max);
            let min_unsel = (0..len)
                .filter(|i| !fast.contains(i))
                .map(|i| losses[i])
                .fold(f64::MAX, f64::min);
            assert!(fast.len() == count && (count == len || max_sel <= min_unsel));
        }
    }

    #[test]
    fn coteaching_cross_update_uses_peer_picks() {
        // Networks engineered so their loss orderings are known: we check
        // the recorded selections rather than internals.
        let mut f = tiny_net(1, NetworkId::F);
        let mut g = tiny_net(2, NetworkId::G);
        let mut af = AdamState::new(AdamConfig::default(), &f.parameters).unwrap();
        let mut ag = AdamState::new(AdamConfig::default(), &g.parameters).unwrap();
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let lf = f.per_sample_losses(&batch.x, &batch.noisy_labels).unwrap();
        let lg = g.per_sample_losses(&batch.x, &batch.noisy_labels).unwrap();
        let expect_f = select_small_loss(&lf, 2).unwrap();
        let expect_g = select_small_loss(&lg, 2).unwrap();

        let (rf, rg, stats) = coteaching_step(&mut f, &mut af, &mut g, &mut ag, &batch, 0.5).unwrap();
        assert_eq!(rf.kept_indices, expect_f);
        assert_eq!(rg.kept_indices, expect_g);
        assert_eq!(stats.used, 4);
    }

    #[test]
    fn coteaching_fraction_one_with_identical_twins_matches_standard() {
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);

        let mut f = tiny_net(7, NetworkId::F);
        let mut g = tiny_net(7, NetworkId::G);
        let mut af = AdamState::new(AdamConfig::default(), &f.parameters).unwrap();
        let mut ag = AdamState::new(AdamConfig::default(), &g.parameters).unwrap();
        coteaching_step(&mut f, &mut af, &mut g, &mut ag, &batch, 1.0).unwrap();

        let mut s = tiny_net(7, NetworkId::F);
        let mut as_ = AdamState::new(AdamConfig::default(), &s.parameters).unwrap();
        standard_step(&mut s, &mut as_, &batch).unwrap();

        for (pf, ps) in f.parameters.iter().zip(&s.parameters) {
            assert_eq!(pf.data, ps.data);
        }
        for (pg, ps) in g.parameters.iter().zip(&s.parameters) {
            assert_eq!(pg.data, ps.data);
        }
    }

    #[test]
    fn selfpaced_trains_on_own_small_loss_picks() {
        let mut net = tiny_net(3, NetworkId::F);
        let mut adam = AdamState::new(AdamConfig::default(), &net.parameters).unwrap();
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let losses = net.per_sample_losses(&batch.x, &batch.noisy_labels).unwrap();
        let expect = select_small_loss(&losses, 2).unwrap();
        let (rec, stats) = selfpaced_step(&mut net, &mut adam, &batch, 0.5).unwrap();
        assert_eq!(rec.kept_indices, expect);
        assert_eq!(stats.used, 2);
    }

    #[test]
    fn selfpaced_fraction_one_equals_standard() {
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let mut a = tiny_net(11, NetworkId::F);
        let mut aa = AdamState::new(AdamConfig::default(), &a.parameters).unwrap();
        selfpaced_step(&mut a, &mut aa, &batch, 1.0).unwrap();

        let mut b = tiny_net(11, NetworkId::F);
        let mut ab = AdamState::new(AdamConfig::default(), &b.parameters).unwrap();
        standard_step(&mut b, &mut ab, &batch).unwrap();
        for (pa, pb) in a.parameters.iter().zip(&b.parameters) {
            assert_eq!(pa.data, pb.data);
        }
    }

    #[test]
    fn decoupling_identical_twins_never_update() {
        let mut f = tiny_net(5, NetworkId::F);
        let mut g = tiny_net(5, NetworkId::G);
        let before = f.parameters.clone();
        let mut af = AdamState::new(AdamConfig::default(), &f.parameters).unwrap();
        let mut ag = AdamState::new(AdamConfig::default(), &g.parameters).unwrap();
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let (rf, rg, stats) = decoupling_step(&mut f, &mut af, &mut g, &mut ag, &batch).unwrap();
        assert!(rf.kept_indices.is_empty() && rg.kept_indices.is_empty());
        assert_eq!(stats.used, 0);
        for (p, b) in f.parameters.iter().zip(&before) {
            assert_eq!(p.data, b.data);
        }
    }

    #[test]
    fn decoupling_selects_exact_disagreement_set() {
        let mut f = tiny_net(5, NetworkId::F);
        let mut g = tiny_net(6, NetworkId::G);
        let batch = batch_of(
            vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8, -0.6, 0.2, 0.7, -0.9],
            6,
            vec![0, 1, 2, 0, 1, 2],
        );
        let pf = f.predict(&batch.x).unwrap();
        let pg = g.predict(&batch.x).unwrap();
        let expect: Vec<usize> = (0..6).filter(|&i| pf[i] != pg[i]).collect();
        let mut af = AdamState::new(AdamConfig::default(), &f.parameters).unwrap();
        let mut ag = AdamState::new(AdamConfig::default(), &g.parameters).unwrap();
        let (rf, _, _) = decoupling_step(&mut f, &mut af, &mut g, &mut ag, &batch).unwrap();
        assert_eq!(rf.kept_indices, expect);
    }

    #[test]
    fn bootstrap_beta_one_is_standard() {
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let mut a = tiny_net(13, NetworkId::F);
        let mut aa = AdamState::new(AdamConfig::default(), &a.parameters).unwrap();
        bootstrap_step(&mut a, &mut aa, &batch, 1.0).unwrap();
        let mut b = tiny_net(13, NetworkId::F);
        let mut ab = AdamState::new(AdamConfig::default(), &b.parameters).unwrap();
        standard_step(&mut b, &mut ab, &batch).unwrap();
        for (pa, pb) in a.parameters.iter().zip(&b.parameters) {
            for (va, vb) in pa.data.iter().zip(&pb.data) {
                assert!((va - vb).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bootstrap_hand_evaluated_loss() {
        // p = [0.7, 0.2, 0.1], noisy label 1, β = 0.8:
        // loss = 0.8·(−ln 0.2) + 0.2·(−ln 0.7) ≈ 1.3589
        let spec = MlpSpec::new(vec![3, 3], Activation::default(), 0).unwrap();
        let mut net = init_network(spec, NetworkId::F).unwrap();
        net.parameters[0].data = {
            let mut w = vec![0.0; 9];
            w[0] = 1.0;
            w[4] = 1.0;
            w[8] = 1.0;
            w
        };
        net.parameters[1].data = vec![0.0; 3];
        let p = [0.7f64, 0.2, 0.1];
        let batch = batch_of(p.iter().map(|v| v.ln()).collect(), 1, vec![1]);
        let graph = bootstrap_loss_graph(&net, &batch, 0.8).unwrap();
        let loss = graph.tape.value(graph.per_sample)[0];
        let expected = 0.8 * -(0.2f64.ln()) + 0.2 * -(0.7f64.ln());
        assert!((loss - expected).abs() < 1e-12);
        assert!((loss - 1.3589).abs() < 1e-4);
    }

    #[test]
    fn bootstrap_agreement_collapses_to_plain_ce() {
        // argmax p equals the noisy label, so the blend is plain CE for
        // any β.
        let spec = MlpSpec::new(vec![3, 3], Activation::default(), 0).unwrap();
        let mut net = init_network(spec, NetworkId::F).unwrap();
        net.parameters[0].data = {
            let mut w = vec![0.0; 9];
            w[0] = 1.0;
            w[4] = 1.0;
            w[8] = 1.0;
            w
        };
        net.parameters[1].data = vec![0.0; 3];
        let p = [0.7f64, 0.2, 0.1];
        let batch = batch_of(p.iter().map(|v| v.ln()).collect(), 1, vec![0]);
        let plain = net
            .per_sample_losses(&batch.x, &batch.noisy_labels)
            .unwrap()[0];
        for beta in [0.3, 0.8, 1.0] {
            let graph = bootstrap_loss_graph(&net, &batch, beta).unwrap();
            let loss = graph.tape.value(graph.per_sample)[0];
            assert!((loss - plain).abs() < 1e-12, "beta {beta}");
        }
    }

    #[test]
    fn fcorrection_identity_matrix_matches_standard_loss() {
        let net = tiny_net(17, NetworkId::F);
        let batch = batch_of(vec![0.5, -0.2, 1.0, 0.3, -0.4, 0.9, 0.1, 0.8], 4, vec![0, 1, 2, 0]);
        let q = build_q(NoiseKind::Symmetry, 3, 0.0).unwrap();
        let graph = fcorrection_loss_graph(&net, &batch, &q).unwrap();
        let plain = net.per_sample_losses(&batch.x, &batch.noisy_labels).unwrap();
        for (a, b) in graph.tape.value(graph.per_sample).iter().zip(&plain) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fcorrection_fully_mixing_two_class_matrix_kills_gradient() {
        let spec = MlpSpec::new(vec![2, 2], Activation::default(), 3).unwrap();
        let mut net = init_network(spec, NetworkId::F).unwrap();
        let before = net.parameters.clone();
        let q = build_q(NoiseKind::Symmetry, 2, 0.5).unwrap();
        let batch = batch_of(vec![0.4, -0.7, 0.1, 0.9], 2, vec![0, 1]);
        let graph = fcorrection_loss_graph(&net, &batch, &q).unwrap();
        for &l in graph.tape.value(graph.per_sample) {
            assert!((l - 2f64.ln()).abs() < 1e-12);
        }
        let mut adam = AdamState::new(AdamConfig::default(), &net.parameters).unwrap();
        fcorrection_step(&mut net, &mut adam, &batch, &q).unwrap();
        for (p, b) in net.parameters.iter().zip(&before) {
            for (x, y) in p.data.iter().zip(&b.data) {
                assert!((x - y).abs() < 1e-9, "parameters moved under zero signal");
            }
        }
    }

    #[test]
    fn fcorrection_pair_matrix_hand_value() {
        // One-hot p on class 0, noisy label 1, pair ε=0.45:
        // (Qᵀp)[1] = Q[0][1] = 0.45 → loss = −ln 0.45 ≈ 0.7985
        let spec = MlpSpec::new(vec![5, 5], Activation::default(), 0).unwrap();
        let mut net = init_network(spec, NetworkId::F).unwrap();
        net.parameters[0].data = vec![0.0; 25];
        net.parameters[1].data = vec![60.0, 0.0, 0.0, 0.0, 0.0];
        let q = build_q(NoiseKind::Pair, 5, 0.45).unwrap();
        let batch = batch_of(vec![0.0; 5], 1, vec![1]);
        let graph = fcorrection_loss_graph(&net, &batch, &q).unwrap();
        let loss = graph.tape.value(graph.per_sample)[0];
        assert!((loss - -(0.45f64.ln())).abs() < 1e-9);
        assert!((loss - 0.7985).abs() < 1e-4);
    }

    #[test]
    fn run_training_zero_epochs_returns_untouched_networks() {
        let data = attach_noise(
            make_blobs(20, 3, 2, 0.2, 1).unwrap(),
            NoiseSpec {
                kind: NoiseKind::Symmetry,
                epsilon: 0.2,
                corruption_seed: 2,
            },
        )
        .unwrap();
        let eval = make_blobs(10, 3, 2, 0.2, 9).unwrap();
        let net = tiny_net(21, NetworkId::F);
        let before = net.parameters.clone();
        let config = TrainerConfig {
            paradigm: Paradigm::Standard,
            batch_size: 8,
            epochs: 0,
            schedule: ScheduleParams::new(0.2, 10, 1.0).unwrap(),
            adam: AdamConfig::default(),
            shuffle_seed: 4,
            bootstrap_beta: None,
            oracle_q: None,
        };
        let run = run_training(&config, net, None, &data, &eval).unwrap();
        assert!(run.records.is_empty());
        for (p, b) in run.net_f.parameters.iter().zip(&before) {
            assert_eq!(p.data, b.data);
        }
    }

    #[test]
    fn run_training_is_deterministic() {
        let data = attach_noise(
            make_blobs(30, 3, 2, 0.2, 1).unwrap(),
            NoiseSpec {
                kind: NoiseKind::Symmetry,
                epsilon: 0.3,
                corruption_seed: 2,
            },
        )
        .unwrap();
        let eval = make_blobs(10, 3, 2, 0.2, 9).unwrap();
        let config = TrainerConfig {
            paradigm: Paradigm::CoTeaching,
            batch_size: 16,
            epochs: 3,
            schedule: ScheduleParams::new(0.3, 10, 1.0).unwrap(),
            adam: AdamConfig::default(),
            shuffle_seed: 4,
            bootstrap_beta: None,
            oracle_q: None,
        };
        let run = |seed_f: u64, seed_g: u64| {
            run_training(
                &config,
                tiny_net(seed_f, NetworkId::F),
                Some(tiny_net(seed_g, NetworkId::G)),
                &data,
                &eval,
            )
            .unwrap()
        };
        let a = run(1, 2);
        let b = run(1, 2);
        assert_eq!(a.records, b.records);
        for (pa, pb) in a.net_f.parameters.iter().zip(&b.net_f.parameters) {
            assert_eq!(pa.data, pb.data);
        }
    }

    #[test]
    fn config_validation_rejects_misplaced_fields() {
        let base = TrainerConfig {
            paradigm: Paradigm::Standard,
            batch_size: 8,
            epochs: 1,
            schedule: ScheduleParams::new(0.2, 10, 1.0).unwrap(),
            adam: AdamConfig::default(),
            shuffle_seed: 0,
            bootstrap_beta: None,
            oracle_q: None,
        };
        let mut with_beta = base.clone();
        with_beta.bootstrap_beta = Some(0.8);
        assert!(with_beta.validate().is_err());

        let mut bootstrap_missing = base.clone();
        bootstrap_missing.paradigm = Paradigm::Bootstrap;
        assert!(bootstrap_missing.validate().is_err());

        let mut bad_beta = base.clone();
        bad_beta.paradigm = Paradigm::Bootstrap;
        bad_beta.bootstrap_beta = Some(1.5);
        assert!(bad_beta.validate().is_err());

        let mut fcorr_missing = base;
        fcorr_missing.paradigm = Paradigm::FCorrection;
        assert!(fcorr_missing.validate().is_err());
    }
}
