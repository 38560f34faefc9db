//! Optimisation of the transformer for pairwise and joint alignment.

mod check;
mod config;
mod engine;
mod joint;
mod optim;
mod pairwise;
mod report;

pub use check::{check_model_gradients, ModelGradcheck, ModelGradcheckConfig};
pub use config::{OptimizerKind, TrainConfig};
#[cfg(test)]
pub(crate) use joint::stratified_batches;
pub use joint::{fit_joint, joint_data_term, joint_mode, JointFit, JointMode, VarianceSummary};
pub use optim::{adam_step, sgd_step, AdamConfig, AdamState};
pub use pairwise::{fit_pairwise, PairwiseFit};
pub use report::{moving_average, EpochRecord, TrainReport};
