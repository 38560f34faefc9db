use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// Non-empty set of equally shaped series, optionally labelled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Batch<S> {
    samples: Vec<TimeSeries<S>>,
}

impl<S: Scalar> Batch<S> {
    pub fn new(samples: Vec<TimeSeries<S>>) -> Result<Self> {
        let Some(first) = samples.first() else {
            return invalid("empty batch");
        };
        for (i, s) in samples.iter().enumerate() {
            if s.channels() != first.channels() || s.len() != first.len() {
                return invalid(format!(
                    "sample {i} is {}x{}, expected {}x{}",
                    s.channels(),
                    s.len(),
                    first.channels(),
                    first.len()
                ));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TimeSeries<S>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<TimeSeries<S>> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.samples[0].channels()
    }

    pub fn series_len(&self) -> usize {
        self.samples[0].len()
    }

    pub fn labels(&self) -> Vec<Option<usize>> {
        self.samples.iter().map(TimeSeries::label).collect()
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.samples.iter().all(|s| s.label().is_some())
    }

    /// Sample indices per class, classes in ascending id order.
    pub fn class_indices(&self) -> Result<BTreeMap<usize, Vec<usize>>> {
        group_by_label(&self.labels())
    }
}

pub(crate) fn group_by_label(labels: &[Option<usize>]) -> Result<BTreeMap<usize, Vec<usize>>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            Some(k) => groups.entry(*k).or_default().push(i),
            None => return invalid(format!("sample {i} has no label")),
        }
    }
    Ok(groups)
}
