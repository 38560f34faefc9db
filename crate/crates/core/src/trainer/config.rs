use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Optimisation settings shared by pairwise and joint fitting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Joint training runs full-batch up to this many samples and switches to
    /// class-stratified mini-batches of about this size beyond it.
    pub batch_size: usize,
    /// Weight of the slope regulariser.
    pub alpha: f64,
    pub lambda_var: f64,
    pub lambda_smooth: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    /// Decoupled decay, `p -= lr * weight_decay * p`.
    pub weight_decay: f64,
    pub seed: u64,
    /// Divide data terms by `d T`.
    pub normalize: bool,
    /// Stop when the best total improved by less than `early_stop_tol`
    /// (relative) over this many epochs. Zero disables early stopping.
    pub early_stop_patience: usize,
    pub early_stop_tol: f64,
    /// Record wall-clock times. Off by default so reports are reproducible
    /// byte for byte.
    pub record_timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            epochs: 500,
            batch_size: 256,
            alpha: 0.1,
            lambda_var: 1e-3,
            lambda_smooth: 0.5,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            weight_decay: 0.0,
            seed: 0,
            normalize: true,
            early_stop_patience: 50,
            early_stop_tol: 1e-8,
            record_timing: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return invalid(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            ));
        }
        if self.epochs == 0 {
            return invalid("epochs must be >= 1");
        }
        if self.batch_size < 2 {
            return invalid("batch_size must be >= 2");
        }
        if !(self.weight_decay >= 0.0) {
            return invalid("weight_decay must be >= 0");
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return invalid("alpha must be finite and >= 0");
        }
        if !(self.lambda_var > 0.0) || !(self.lambda_smooth > 0.0) {
            return invalid("lambda_var and lambda_smooth must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return invalid("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return invalid("adam_eps must be positive");
        }
        Ok(())
    }
}
