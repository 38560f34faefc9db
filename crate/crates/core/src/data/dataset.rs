use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::objectives::Batch;
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// Ground-truth warps of a synthetic dataset, one value vector per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct GroundTruth<S> {
    pub train: Vec<Vec<S>>,
    pub test: Vec<Vec<S>>,
}

/// Train and test splits sharing one length, channel count and label set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Dataset<S> {
    pub name: String,
    pub train: Batch<S>,
    pub test: Batch<S>,
    /// Original label of each class id.
    pub class_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth<S>>,
}

impl<S: Scalar> Dataset<S> {
    pub fn new(
        name: impl Into<String>,
        train: Batch<S>,
        test: Batch<S>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let ds = Self {
            name: name.into(),
            train,
            test,
            class_names,
            ground_truth: None,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.train.series_len() != self.test.series_len()
            || self.train.channels() != self.test.channels()
        {
            return invalid("train and test splits differ in shape");
        }
        let k = self.class_names.len();
        for s in self.train.samples().iter().chain(self.test.samples()) {
            if let Some(l) = s.label() {
                if l >= k {
                    return invalid(format!("label {l} outside 0..{k}"));
                }
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.train.len() != self.train.len() || gt.test.len() != self.test.len() {
                return invalid("ground truth count differs from sample count");
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn length(&self) -> usize {
        self.train.series_len()
    }

    pub fn channels(&self) -> usize {
        self.train.channels()
    }

    pub fn to_json(&self) -> Result<String>
    where
        S: Serialize,
    {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        S: for<'de> Deserialize<'de>,
    {
        let ds: Self = serde_json::from_str(text)?;
        // re-run the constructors' checks on deserialised data
        let recheck = |b: Batch<S>| -> Result<Batch<S>> {
            let samples = b
                .into_samples()
                .into_iter()
                .map(|s| {
                    Ok(TimeSeries::new(s.channels(), s.len(), s.data().to_vec())?
                        .with_label(s.label()))
                })
                .collect::<Result<Vec<_>>>()?;
            Batch::new(samples)
        };
        let train = recheck(ds.train)?;
        let test = recheck(ds.test)?;
        let ds = Self { train, test, ..ds };
        ds.validate()?;
        Ok(ds)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()>
    where
        S: Serialize,
    {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self>
    where
        S: for<'de> Deserialize<'de>,
    {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
