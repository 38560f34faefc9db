use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::engine::{flatten_grads, run, Terms};
use super::report::TrainReport;
use crate::autodiff::Tape;
use crate::error::{invalid, Result};
use crate::model::{
    forward, forward_graph, kinetic_energy_graph, read_trace, ModelConfig, ModelParams,
};
use crate::objectives::{
    average_sequence, build_sigma, data_scale, multi_class_loss, single_class_loss, Batch,
    SigmaPrior,
};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointMode {
    /// One shared centroid for the whole set.
    Single,
    /// Within-class variances summed over classes.
    Multi,
}

/// Within-class variance before and after warping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceSummary {
    pub raw: f64,
    pub warped: f64,
}

#[derive(Clone, Debug)]
pub struct JointFit<S> {
    pub params: ModelParams<S>,
    pub centroids: BTreeMap<usize, TimeSeries<S>>,
    pub report: TrainReport,
    pub mode: JointMode,
    pub variance: VarianceSummary,
}

/// Chooses the objective from the labels: all labelled means multi-class,
/// none labelled means single-class.
pub fn joint_mode<S: Scalar>(batch: &Batch<S>) -> Result<JointMode> {
    let labeled = batch
        .samples()
        .iter()
        .filter(|s| s.label().is_some())
        .count();
    match labeled {
        0 => Ok(JointMode::Single),
        n if n == batch.len() => Ok(JointMode::Multi),
        n => invalid(format!(
            "{n} of {} samples are labelled; label all or none",
            batch.len()
        )),
    }
}

/// Joint-alignment data term of already warped samples (no normalisation).
pub fn joint_data_term<S: Scalar>(warped: &[TimeSeries<S>], mode: JointMode) -> Result<S> {
    match mode {
        JointMode::Single => single_class_loss(warped),
        JointMode::Multi => multi_class_loss(warped),
    }
}

fn canonical_order<S: Scalar>(a: &TimeSeries<S>, b: &TimeSeries<S>) -> Ordering {
    a.label().cmp(&b.label()).then_with(|| {
        a.data()
            .iter()
            .zip(b.data())
            .map(|(x, y)| x.to_f64_lossy().total_cmp(&y.to_f64_lossy()))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

struct Problem<S> {
    samples: Vec<TimeSeries<S>>,
    mode: JointMode,
    prior: SigmaPrior<S>,
    alpha: S,
    scale: S,
}

impl<S: Scalar> Problem<S> {
    fn group(&self, members: &[usize]) -> Vec<Vec<usize>> {
        match self.mode {
            JointMode::Single => vec![members.to_vec()],
            JointMode::Multi => {
                let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &i in members {
                    groups
                        .entry(self.samples[i].label().expect("labelled"))
                        .or_default()
                        .push(i);
                }
                groups.into_values().collect()
            }
        }
    }

    /// Loss and gradient over `members`.
    ///
    /// Every sample gets its own tape. The cotangent of the data term with
    /// respect to `ĝ_i` is `2 scale (ĝ_i - m_k) / N_k`; the class mean's own
    /// contribution cancels because deviations from a mean sum to zero, so
    /// seeding each tape with it is exact. Per-sample gradients are reduced in
    /// member order, which keeps results independent of the thread count.
    fn evaluate(
        &self,
        params: &ModelParams<S>,
        members: &[usize],
        want_grad: bool,
    ) -> Result<(Terms<S>, Option<Vec<S>>)> {
        let n = S::from_usize_lossy(members.len());
        let reg_weight = self.alpha / n;
        let passes = members
            .par_iter()
            .map(|&i| {
                let s = &self.samples[i];
                let mut tape = Tape::new();
                let vars = params.register(&mut tape, want_grad);
                let out = forward_graph(&mut tape, params, &vars, s, s)?;
                let ke = kinetic_energy_graph(&mut tape, &out.slopes, &self.prior.precision)?;
                read_trace(&tape, &out, s)?;
                Ok((tape, vars, out.warped, ke))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut seeds: Vec<Vec<S>> = vec![Vec::new(); members.len()];
        let mut data = S::zero();
        let pos: BTreeMap<usize, usize> =
            members.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        for group in self.group(members) {
            let nk = S::from_usize_lossy(group.len());
            let values: Vec<&[S]> = group
                .iter()
                .map(|i| {
                    let (tape, _, w, _) = &passes[pos[i]];
                    tape.value(*w).data()
                })
                .collect();
            let mut mean = vec![S::zero(); values[0].len()];
            for v in &values {
                for (m, &x) in mean.iter_mut().zip(*v) {
                    *m += x;
                }
            }
            mean.iter_mut().for_each(|m| *m /= nk);
            let mut class_sum = S::zero();
            for (&i, v) in group.iter().zip(&values) {
                let dev: Vec<S> = v.iter().zip(&mean).map(|(&x, &m)| x - m).collect();
                class_sum += dev.iter().map(|&d| d * d).sum::<S>();
                let c = S::lit(2.0) * self.scale / nk;
                seeds[pos[&i]] = dev.iter().map(|&d| c * d).collect();
            }
            data += class_sum / nk;
        }
        data *= self.scale;
        let reg = passes
            .iter()
            .map(|(tape, _, _, ke)| tape.value(*ke).item())
            .sum::<S>()
            / n;
        let terms = Terms {
            data,
            reg,
            total: data + self.alpha * reg,
        };
        if !want_grad {
            return Ok((terms, None));
        }
        let per_sample = passes
            .par_iter()
            .zip(seeds.into_par_iter())
            .map(|((tape, vars, w, ke), seed)| {
                let g = tape.backward_seeded(&[(*w, seed), (*ke, vec![reg_weight])])?;
                Ok(flatten_grads(&g, tape, &vars.vars))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut total = vec![S::zero(); params.n_values()];
        for g in &per_sample {
            for (t, &x) in total.iter_mut().zip(g) {
                *t += x;
            }
        }
        Ok((terms, Some(total)))
    }
}

/// Splits `groups` into `n_batches` batches so that every class present in
/// a batch contributes at least two members whenever it has two to give.
pub(crate) fn stratified_batches(
    groups: &[Vec<usize>],
    n_batches: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut batches = vec![Vec::new(); n_batches];
    for group in groups {
        let mut members = group.clone();
        members.shuffle(rng);
        let chunks = (members.len() / 2).clamp(1, n_batches);
        let offset = rng.random_range(0..n_batches);
        for c in 0..chunks {
            let lo = c * members.len() / chunks;
            let hi = (c + 1) * members.len() / chunks;
            batches[(offset + c) % n_batches].extend_from_slice(&members[lo..hi]);
        }
    }
    batches.retain(|b| !b.is_empty());
    for b in &mut batches {
        b.sort_unstable();
    }
    batches
}

/// Trains one transformer to align every class of `batch` to its own mean.
///
/// The objective is the within-class variance of the warped samples (one
/// class when the samples carry no labels) plus `alpha` times the slope
/// regulariser averaged over samples. Samples are put in a canonical order
/// first, so reordering the input changes nothing.
pub fn fit_joint<S: Scalar>(
    batch: &Batch<S>,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<JointFit<S>> {
    train_config.validate()?;
    if model_config.input_channels != batch.channels() {
        return invalid(format!(
            "model expects {} input channels but the data has {}",
            model_config.input_channels,
            batch.channels()
        ));
    }
    let mode = joint_mode(batch)?;
    let mut samples = batch.samples().to_vec();
    samples.sort_by(canonical_order);
    let problem = Problem {
        mode,
        prior: build_sigma(
            S::lit(train_config.lambda_var),
            S::lit(train_config.lambda_smooth),
            model_config.n_cells,
        )?,
        alpha: S::lit(train_config.alpha),
        scale: data_scale(batch.channels(), batch.series_len(), train_config.normalize),
        samples,
    };
    let all: Vec<usize> = (0..problem.samples.len()).collect();
    let groups = problem.group(&all);
    let full_batch = all.len() <= train_config.batch_size;
    let n_batches = all.len().div_ceil(train_config.batch_size);
    let mut rng = ChaCha8Rng::seed_from_u64(train_config.seed);

    let params = ModelParams::init(model_config)?;
    let (params, report) = run(
        train_config,
        params,
        |params, opt, _| {
            if full_batch {
                let (terms, grads) = problem.evaluate(params, &all, true)?;
                opt.step(params, &grads.expect("requested"));
                return Ok(terms);
            }
            // Mean of the mini-batch terms seen during the epoch.
            let batches = stratified_batches(&groups, n_batches, &mut rng);
            let k = S::from_usize_lossy(batches.len());
            let mut acc = Terms {
                data: S::zero(),
                reg: S::zero(),
                total: S::zero(),
            };
            for members in &batches {
                let (terms, grads) = problem.evaluate(params, members, true)?;
                acc.data += terms.data / k;
                acc.reg += terms.reg / k;
                acc.total += terms.total / k;
                opt.step(params, &grads.expect("requested"));
            }
            Ok(acc)
        },
        |params| problem.evaluate(params, &all, false).map(|(t, _)| t),
    )?;

    let warped = problem
        .samples
        .iter()
        .map(|s| forward(&params, s).map(|t| t.warped))
        .collect::<Result<Vec<_>>>()?;
    let variance = VarianceSummary {
        raw: joint_data_term(&problem.samples, mode)?.to_f64_lossy(),
        warped: joint_data_term(&warped, mode)?.to_f64_lossy(),
    };
    let centroids = average_sequence(batch, Some(&params))?;
    Ok(JointFit {
        params,
        centroids,
        report,
        mode,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use rand_distr::{Distribution, Normal};

    use super::*;
    use crate::data::smooth_series;
    use crate::objectives::multi_class_loss_graph;

    #[test]
    fn seeded_per_sample_gradient_matches_one_tape() {
        let config = ModelConfig {
            n_blocks: 2,
            kernel_size: 3,
            channels: 4,
            n_cells: 4,
            input_channels: 1,
            seed: 5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let samples: Vec<TimeSeries<f64>> = (0..7)
            .map(|i| {
                smooth_series(1, 20, 3, 0.0, &mut rng)
                    .unwrap()
                    .with_label(Some(i % 2))
            })
            .collect();
        let mut params = ModelParams::<f64>::init(&config).unwrap();
        let normal = Normal::new(0.0, 0.3).unwrap();
        for b in &mut params.blocks {
            b.head_weight
                .data_mut()
                .iter_mut()
                .for_each(|v| *v = normal.sample(&mut rng));
        }
        let problem = Problem {
            samples: samples.clone(),
            mode: JointMode::Multi,
            prior: build_sigma(1.0, 0.5, 4).unwrap(),
            alpha: 0.2,
            scale: data_scale(1, 20, true),
        };
        let all: Vec<usize> = (0..samples.len()).collect();
        let (terms, grads) = problem.evaluate(&params, &all, true).unwrap();
        let grads = grads.unwrap();

        let mut tape = Tape::new();
        let vars = params.register(&mut tape, true);
        let mut warped = Vec::new();
        let mut reg = None;
        for s in &samples {
            let out = forward_graph(&mut tape, &params, &vars, s, s).unwrap();
            warped.push(out.warped);
            let ke =
                kinetic_energy_graph(&mut tape, &out.slopes, &problem.prior.precision).unwrap();
            reg = Some(match reg {
                None => ke,
                Some(acc) => tape.add(acc, ke).unwrap(),
            });
        }
        let labels: Vec<_> = samples.iter().map(TimeSeries::label).collect();
        let data = multi_class_loss_graph(&mut tape, &warped, &labels).unwrap();
        let data = tape.scale(data, problem.scale);
        let reg = tape.scale(reg.unwrap(), 0.2 / 7.0);
        let total = tape.add(data, reg).unwrap();
        assert!((tape.value(total).item() - terms.total).abs() < 1e-12);
        let reference = flatten_grads(&tape.backward(total).unwrap(), &tape, &vars.vars);
        assert_eq!(reference.len(), grads.len());
        for (a, b) in grads.iter().zip(&reference) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}
