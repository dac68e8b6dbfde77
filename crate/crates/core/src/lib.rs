//! Desk-scale laboratory for training classifiers under noisy labels.
//!
//! The crate provides a dense-tensor reverse-mode autodiff engine with
//! Adam, small MLP classifiers, pair/symmetry label-noise injection, the
//! small-loss kept-fraction schedule, six training paradigms (standard,
//! bootstrap-hard, forward correction, decoupling, self-paced selection,
//! co-teaching), and an experiment harness that runs paradigm × noise ×
//! seed grids into CSV and SVG artifacts.

pub mod adam;
pub mod data;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod noise;
pub mod schedule;
pub mod seed;
pub mod tape;
pub mod tensor;
pub mod trainers;

pub use adam::{zero_grads, AdamConfig, AdamState};
pub use data::{LabeledData, NoisyDataset, TrainBatch};
pub use error::{Error, Result};
pub use model::{init_network, Activation, MlpSpec, Network, NetworkId};
pub use noise::{build_q, corrupt_labels, NoiseKind, NoiseSpec, TransitionMatrix};
pub use schedule::{kept_count, kept_fraction, ScheduleParams};
pub use tape::{NodeId, Tape};
pub use tensor::Tensor;
pub use trainers::{
    run_training, select_small_loss, EpochRecord, Paradigm, SelectionRecord, TrainerConfig,
    TrainingRun,
};
