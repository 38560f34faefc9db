use std::time::Instant;

use super::config::{OptimizerKind, TrainConfig};
use super::optim::{adam_step, sgd_step, AdamConfig, AdamState};
use super::report::{EpochRecord, TrainReport};
use crate::autodiff::{Gradients, Tape, Var};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;

/// Loss terms of one evaluation, in the working precision.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Terms<S> {
    pub data: S,
    pub reg: S,
    pub total: S,
}

impl<S: Scalar> Terms<S> {
    pub fn record(&self, epoch: usize, seconds: Option<f64>) -> EpochRecord {
        EpochRecord {
            epoch,
            data_term: self.data.to_f64_lossy(),
            reg_term: self.reg.to_f64_lossy(),
            total: self.total.to_f64_lossy(),
            seconds,
        }
    }

    pub fn check_finite(&self, epoch: usize) -> Result<()> {
        if self.total.is_finite() && self.data.is_finite() && self.reg.is_finite() {
            Ok(())
        } else {
            Err(Error::Numeric(format!(
                "loss became non-finite at epoch {epoch} (data {}, reg {}); the learning rate is probably too high",
                self.data, self.reg
            )))
        }
    }
}

/// Parameter update rule with its state.
pub(crate) struct Optimizer<S> {
    kind: OptimizerKind,
    adam: AdamConfig<S>,
    state: AdamState<S>,
}

impl<S: Scalar> Optimizer<S> {
    pub fn new(cfg: &TrainConfig, n_values: usize) -> Self {
        Self {
            kind: cfg.optimizer,
            adam: AdamConfig {
                lr: S::lit(cfg.learning_rate),
                beta1: S::lit(cfg.beta1),
                beta2: S::lit(cfg.beta2),
                eps: S::lit(cfg.adam_eps),
                weight_decay: S::lit(cfg.weight_decay),
            },
            state: AdamState::new(n_values),
        }
    }

    /// Applies a flat gradient laid out in parameter declaration order.
    pub fn step(&mut self, params: &mut ModelParams<S>, grads: &[S]) {
        let mut flat: Vec<S> = params
            .tensors()
            .iter()
            .flat_map(|t| t.data().iter().copied())
            .collect();
        match self.kind {
            OptimizerKind::Sgd => sgd_step(&mut flat, grads, self.adam.lr, self.adam.weight_decay),
            OptimizerKind::Adam => adam_step(&mut flat, grads, &mut self.state, &self.adam),
        }
        let mut offset = 0;
        for t in params.tensors_mut() {
            let n = t.len();
            t.data_mut().copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
    }
}

/// Parameter gradients from one backward pass, flattened in declaration order.
pub(crate) fn flatten_grads<S: Scalar>(
    grads: &Gradients<S>,
    tape: &Tape<S>,
    vars: &[Var],
) -> Vec<S> {
    vars.iter()
        .flat_map(|&v| grads.get_or_zeros(v, tape.value(v).len()))
        .collect()
}

/// Epoch loop with best-parameter tracking and early stopping.
///
/// `epoch_fn` evaluates the loss at the current parameters, updates them and
/// returns the pre-update terms. `eval_fn` only evaluates.
pub(crate) fn run<S: Scalar>(
    cfg: &TrainConfig,
    mut params: ModelParams<S>,
    mut epoch_fn: impl FnMut(&mut ModelParams<S>, &mut Optimizer<S>, usize) -> Result<Terms<S>>,
    eval_fn: impl Fn(&ModelParams<S>) -> Result<Terms<S>>,
) -> Result<(ModelParams<S>, TrainReport)> {
    let start = cfg.record_timing.then(Instant::now);
    let elapsed = || start.map(|s| s.elapsed().as_secs_f64());
    let mut opt = Optimizer::new(cfg, params.n_values());
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(S, ModelParams<S>, usize, Terms<S>)> = None;
    let mut best_hist: Vec<S> = Vec::with_capacity(cfg.epochs);
    let mut early_stopped = false;

    for epoch in 0..cfg.epochs {
        let snapshot = params.clone();
        let terms = epoch_fn(&mut params, &mut opt, epoch)?;
        terms.check_finite(epoch)?;
        records.push(terms.record(epoch, elapsed()));
        if best.as_ref().is_none_or(|b| terms.total < b.0) {
            best = Some((terms.total, snapshot, epoch, terms));
        }
        let best_total = best.as_ref().expect("set above").0;
        best_hist.push(best_total);
        if epoch % 50 == 0 {
            log::debug!(
                "epoch {epoch}: data {} reg {} total {}",
                terms.data,
                terms.reg,
                terms.total
            );
        }
        let p = cfg.early_stop_patience;
        if p > 0 && epoch >= p {
            let before = best_hist[epoch - p];
            let scale = before.abs().max(S::min_positive_value());
            if (before - best_total) / scale < S::lit(cfg.early_stop_tol) {
                log::info!("early stop at epoch {epoch}");
                early_stopped = true;
                break;
            }
        }
        if !params.is_finite() {
            return Err(Error::Numeric(format!(
                "parameters became non-finite after epoch {epoch}; the learning rate is probably too high"
            )));
        }
    }

    let last = eval_fn(&params)?;
    let (_, mut best_params, mut best_epoch, mut best_terms) = best.expect("at least one epoch");
    if last.total.is_finite() && last.total < best_terms.total {
        best_params = params;
        best_epoch = records.len();
        best_terms = last;
    }
    let report = TrainReport {
        final_terms: best_terms.record(best_epoch, None),
        epochs: records,
        best_epoch,
        early_stopped,
        wall_seconds: elapsed(),
    };
    Ok((best_params, report))
}
