//! Alignment objectives, the smoothness prior on slopes, and centroids.

mod average;
mod batch;
mod loss;
mod prior;

pub use average::{average_sequence, pointwise_mean};
pub use batch::Batch;
pub use loss::{
    data_scale, multi_class_loss, multi_class_loss_graph, pairwise_input, pairwise_loss,
    pairwise_loss_graph, single_class_loss, single_class_loss_graph, LossTerms, LossVars,
};
pub use prior::{build_sigma, Precision, SigmaPrior, JITTER};

#[cfg(test)]
mod tests;
