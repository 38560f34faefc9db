use std::collections::BTreeMap;

use serde::Serialize;

use super::batch::group_by_label;
use super::prior::SigmaPrior;
use crate::autodiff::{Tape, Var};
use crate::error::{invalid, Result};
use crate::model::{kinetic_energy, ForwardTrace};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossTerms<S> {
    pub data: S,
    pub reg: S,
    pub total: S,
}

/// Scale applied to a data term: `1 / (d T)` when normalising.
pub fn data_scale<S: Scalar>(channels: usize, len: usize, normalize: bool) -> S {
    if normalize {
        S::one() / S::from_usize_lossy(channels * len)
    } else {
        S::one()
    }
}

/// `‖f - ĝ‖² / (d T) + α Σ_l a_l^T Σ^{-1} a_l` with `ĝ` taken from `trace`.
pub fn pairwise_loss<S: Scalar>(
    f: &TimeSeries<S>,
    g: &TimeSeries<S>,
    trace: &ForwardTrace<S>,
    alpha: S,
    prior: &SigmaPrior<S>,
    normalize: bool,
) -> Result<LossTerms<S>> {
    f.check_same_shape(g)?;
    f.check_same_shape(&trace.warped)?;
    let data = f.squared_distance(&trace.warped)? * data_scale(f.channels(), f.len(), normalize);
    let reg = kinetic_energy(trace, &prior.precision)?;
    Ok(LossTerms {
        data,
        reg,
        total: data + alpha * reg,
    })
}

fn check_samples<S: Scalar>(warped: &[TimeSeries<S>]) -> Result<()> {
    let Some(first) = warped.first() else {
        return invalid("empty batch");
    };
    warped.iter().try_for_each(|s| first.check_same_shape(s))
}

fn within_variance<S: Scalar>(members: &[&TimeSeries<S>]) -> S {
    let n = S::from_usize_lossy(members.len());
    let len = members[0].data().len();
    let mut mean = vec![S::zero(); len];
    for m in members {
        for (acc, &v) in mean.iter_mut().zip(m.data()) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= n;
    }
    let total: S = members
        .iter()
        .map(|m| {
            m.data()
                .iter()
                .zip(&mean)
                .map(|(&v, &mu)| (v - mu) * (v - mu))
                .sum::<S>()
        })
        .sum();
    total / n
}

/// `(1/N) Σ_i ‖ĝ_i - mean(ĝ)‖²`.
pub fn single_class_loss<S: Scalar>(warped: &[TimeSeries<S>]) -> Result<S> {
    check_samples(warped)?;
    Ok(within_variance(&warped.iter().collect::<Vec<_>>()))
}

/// `Σ_k (1/N_k) Σ_{i: z_i = k} ‖ĝ_i - mean_k(ĝ)‖²` with labels read from the series.
pub fn multi_class_loss<S: Scalar>(warped: &[TimeSeries<S>]) -> Result<S> {
    check_samples(warped)?;
    let labels: Vec<_> = warped.iter().map(TimeSeries::label).collect();
    let groups = group_by_label(&labels)?;
    Ok(groups
        .values()
        .map(|idx| within_variance(&idx.iter().map(|&i| &warped[i]).collect::<Vec<_>>()))
        .sum())
}

fn variance_graph<S: Scalar>(tape: &mut Tape<S>, members: &[Var]) -> Result<Var> {
    let inv_n = S::one() / S::from_usize_lossy(members.len());
    let mut sum = members[0];
    for &m in &members[1..] {
        sum = tape.add(sum, m)?;
    }
    let mean = tape.scale(sum, inv_n);
    let mut total: Option<Var> = None;
    for &m in members {
        let d = tape.sub(m, mean)?;
        let sq = tape.squared_norm(d);
        total = Some(match total {
            None => sq,
            Some(acc) => tape.add(acc, sq)?,
        });
    }
    Ok(tape.scale(total.expect("non-empty"), inv_n))
}

/// Graph version of [`single_class_loss`]; the batch mean is part of the graph.
pub fn single_class_loss_graph<S: Scalar>(tape: &mut Tape<S>, warped: &[Var]) -> Result<Var> {
    if warped.is_empty() {
        return invalid("empty batch");
    }
    variance_graph(tape, warped)
}

/// Graph version of [`multi_class_loss`].
pub fn multi_class_loss_graph<S: Scalar>(
    tape: &mut Tape<S>,
    warped: &[Var],
    labels: &[Option<usize>],
) -> Result<Var> {
    if warped.is_empty() {
        return invalid("empty batch");
    }
    if warped.len() != labels.len() {
        return invalid("one label per sample required");
    }
    let groups: BTreeMap<usize, Vec<usize>> = group_by_label(labels)?;
    let mut total: Option<Var> = None;
    for idx in groups.values() {
        let members: Vec<Var> = idx.iter().map(|&i| warped[i]).collect();
        let v = variance_graph(tape, &members)?;
        total = Some(match total {
            None => v,
            Some(acc) => tape.add(acc, v)?,
        });
    }
    Ok(total.expect("non-empty"))
}

/// Tape handles of a recorded loss.
#[derive(Clone, Copy, Debug)]
pub struct LossVars {
    pub data: Var,
    pub reg: Var,
    pub total: Var,
}

/// Graph version of [`pairwise_loss`]: `warped` is the recorded `ĝ`,
/// `slopes` the per-block slope vectors.
pub fn pairwise_loss_graph<S: Scalar>(
    tape: &mut Tape<S>,
    f: &TimeSeries<S>,
    warped: Var,
    slopes: &[Var],
    alpha: S,
    prior: &SigmaPrior<S>,
    normalize: bool,
) -> Result<LossVars> {
    if tape.shape(warped) != [f.channels(), f.len()] {
        return invalid("warped signal shape differs from the reference");
    }
    let target = tape.constant(crate::autodiff::Tensor::new(
        &[f.channels(), f.len()],
        f.data().to_vec(),
    )?);
    let diff = tape.sub(target, warped)?;
    let sq = tape.squared_norm(diff);
    let data = tape.scale(sq, data_scale(f.channels(), f.len(), normalize));
    let reg = crate::model::kinetic_energy_graph(tape, slopes, &prior.precision)?;
    let weighted = tape.scale(reg, alpha);
    let total = tape.add(data, weighted)?;
    Ok(LossVars { data, reg, total })
}

/// Network input for pairwise alignment: query channels followed by target channels.
pub fn pairwise_input<S: Scalar>(
    query: &TimeSeries<S>,
    target: &TimeSeries<S>,
) -> Result<TimeSeries<S>> {
    query.concat_channels(target)
}
