use serde::Serialize;

use super::dtw::dtw_path;
use crate::error::{invalid, Result};
use crate::objectives::{pointwise_mean, Batch};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

pub const DEFAULT_DBA_ITERATIONS: usize = 10;

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct DbaResult<S> {
    pub barycenter: TimeSeries<S>,
    /// Sum of squared DTW distances to the barycenter: at the Euclidean-mean
    /// start, then after every iteration.
    pub objective: Vec<S>,
}

fn objective<S: Scalar>(members: &[TimeSeries<S>], center: &TimeSeries<S>) -> Result<S> {
    members
        .iter()
        .map(|m| dtw_path(center, m, None).map(|(c, _)| c))
        .sum()
}

/// DTW barycenter averaging started from the Euclidean mean.
///
/// Each iteration aligns every member to the current barycenter and replaces
/// each barycenter frame with the mean of the member frames mapped onto it.
pub fn dba_barycenter<S: Scalar>(set: &Batch<S>, iterations: usize) -> Result<DbaResult<S>> {
    let members = set.samples();
    if members.is_empty() {
        return invalid("DBA needs a non-empty set");
    }
    let refs: Vec<&TimeSeries<S>> = members.iter().collect();
    let mut center = pointwise_mean(&refs)?;
    let mut history = vec![objective(members, &center)?];
    let (d, t) = (center.channels(), center.len());
    for _ in 0..iterations {
        let mut sums = vec![S::zero(); d * t];
        let mut counts = vec![0usize; t];
        for m in members {
            let (_, path) = dtw_path(&center, m, None)?;
            for (i, j) in path {
                counts[i] += 1;
                for c in 0..d {
                    sums[c * t + i] += m.row(c)[j];
                }
            }
        }
        for c in 0..d {
            for i in 0..t {
                sums[c * t + i] /= S::from_usize_lossy(counts[i]);
            }
        }
        center = TimeSeries::new(d, t, sums)?;
        history.push(objective(members, &center)?);
    }
    Ok(DbaResult {
        barycenter: center,
        objective: history,
    })
}
