//! Two-phase training: sentence-level tasks first, then the word-level task.

pub mod log;
pub mod metrics;
pub mod run;

pub use log::{LogRow, TrainLog};
pub use metrics::{evaluate, majority_baseline, Accuracy, Tally};
pub use run::{
    dev_slice, init_coarse, initial_fine_loss, train_coarse, train_coarse_observed, train_fine, train_fine_observed,
    TrainConfig, TrainOutcome,
};
