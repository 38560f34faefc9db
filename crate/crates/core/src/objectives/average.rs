use std::collections::BTreeMap;

use crate::error::Result;
use crate::model::{forward, ModelParams};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

use super::batch::Batch;

/// Pointwise mean of equally shaped series.
pub fn pointwise_mean<S: Scalar>(members: &[&TimeSeries<S>]) -> Result<TimeSeries<S>> {
    let first = members
        .first()
        .ok_or_else(|| crate::Error::InvalidArgument("no series to average".into()))?;
    let mut acc = vec![S::zero(); first.data().len()];
    for m in members {
        first.check_same_shape(m)?;
        for (a, &v) in acc.iter_mut().zip(m.data()) {
            *a += v;
        }
    }
    let n = S::from_usize_lossy(members.len());
    acc.iter_mut().for_each(|v| *v /= n);
    TimeSeries::new(first.channels(), first.len(), acc)
}

/// Per-class centroids. With a model, samples are warped first; without one
/// this is the plain Euclidean mean.
pub fn average_sequence<S: Scalar>(
    batch: &Batch<S>,
    model: Option<&ModelParams<S>>,
) -> Result<BTreeMap<usize, TimeSeries<S>>> {
    let samples: Vec<TimeSeries<S>> = match model {
        Some(params) => batch
            .samples()
            .iter()
            .map(|s| forward(params, s).map(|t| t.warped))
            .collect::<Result<_>>()?,
        None => batch.samples().to_vec(),
    };
    let labels: Vec<_> = batch
        .samples()
        .iter()
        .map(|s| Some(s.label().unwrap_or(0)))
        .collect();
    let groups = super::batch::group_by_label(&labels)?;
    groups
        .into_iter()
        .map(|(k, idx)| {
            let members: Vec<_> = idx.iter().map(|&i| &samples[i]).collect();
            pointwise_mean(&members).map(|c| (k, c.with_label(Some(k))))
        })
        .collect()
}
