use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dtw::dtw_distance;
use crate::error::{invalid, Result};
use crate::model::{forward, ModelParams};
use crate::objectives::Batch;
use crate::scalar::Scalar;
use crate::series::TimeSeries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Dtw,
}

impl Metric {
    pub fn distance<S: Scalar>(self, x: &TimeSeries<S>, y: &TimeSeries<S>) -> Result<S> {
        match self {
            Metric::Euclidean => x.euclidean_distance(y),
            Metric::Dtw => dtw_distance(x, y),
        }
    }
}

/// Distances from every query (rows) to every reference (columns).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceMatrix {
    pub metric: Metric,
    pub rows: usize,
    pub cols: usize,
    /// Row-major.
    pub values: Vec<f64>,
}

impl DistanceMatrix {
    /// Rows are computed in parallel and assembled in order.
    pub fn compute<S: Scalar>(
        queries: &[TimeSeries<S>],
        references: &[TimeSeries<S>],
        metric: Metric,
    ) -> Result<Self> {
        let rows = queries
            .par_iter()
            .map(|q| {
                references
                    .iter()
                    .map(|r| metric.distance(q, r).map(Scalar::to_f64_lossy))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            metric,
            rows: queries.len(),
            cols: references.len(),
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// One line per query, comma separated, no header.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(f64::to_string).collect();
            writeln!(out, "{}", line.join(",")).expect("writing to a String");
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Outcome of one classifier on a labelled test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// Class ids indexing the confusion matrix.
    pub classes: Vec<usize>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<usize>,
}

impl ClassifierResult {
    fn build(
        truth: &[usize],
        predictions: Vec<usize>,
        known: impl IntoIterator<Item = usize>,
    ) -> Self {
        let classes: Vec<usize> = known
            .into_iter()
            .chain(truth.iter().copied())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |c: usize| classes.binary_search(&c).expect("class listed");
        let mut confusion = vec![vec![0; classes.len()]; classes.len()];
        for (&t, &p) in truth.iter().zip(&predictions) {
            confusion[index(t)][index(p)] += 1;
        }
        let correct = truth
            .iter()
            .zip(&predictions)
            .filter(|(t, p)| t == p)
            .count();
        Self {
            accuracy: correct as f64 / truth.len() as f64,
            correct,
            total: truth.len(),
            classes,
            confusion,
            predictions,
        }
    }
}

/// Accuracies per method, keyed by method name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub methods: BTreeMap<String, ClassifierResult>,
    pub seconds: Option<f64>,
}

impl EvalReport {
    pub fn insert(&mut self, name: impl Into<String>, result: ClassifierResult) {
        self.methods.insert(name.into(), result);
    }

    pub fn accuracy(&self, name: &str) -> Option<f64> {
        self.methods.get(name).map(|r| r.accuracy)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn test_labels<S: Scalar>(test: &Batch<S>) -> Result<Vec<usize>> {
    test.samples()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.label().ok_or_else(|| {
                crate::Error::InvalidArgument(format!("test sample {i} has no label"))
            })
        })
        .collect()
}

/// Resamples to `len` when needed, then warps through `model` when given.
fn prepare<S: Scalar>(
    s: &TimeSeries<S>,
    len: usize,
    model: Option<&ModelParams<S>>,
) -> Result<TimeSeries<S>> {
    let s = if s.len() == len {
        s.clone()
    } else {
        s.resample(len)?
    };
    match model {
        Some(params) => forward(params, &s).map(|t| t.warped),
        None => Ok(s),
    }
}

fn prepare_all<S: Scalar>(
    samples: &[TimeSeries<S>],
    len: usize,
    model: Option<&ModelParams<S>>,
) -> Result<Vec<TimeSeries<S>>> {
    samples.par_iter().map(|s| prepare(s, len, model)).collect()
}

/// Nearest-centroid classification. With a model, test samples are warped
/// first; without one this is the plain baseline for the chosen metric.
pub fn ncc_classify<S: Scalar>(
    test: &Batch<S>,
    centroids: &BTreeMap<usize, TimeSeries<S>>,
    model: Option<&ModelParams<S>>,
    metric: Metric,
) -> Result<ClassifierResult> {
    let Some(first) = centroids.values().next() else {
        return invalid("no centroids");
    };
    let truth = test_labels(test)?;
    let len = first.len();
    if centroids
        .values()
        .any(|c| c.len() != len || c.channels() != first.channels())
    {
        return invalid("centroids differ in shape");
    }
    let queries = prepare_all(test.samples(), len, model)?;
    let ids: Vec<usize> = centroids.keys().copied().collect();
    let refs: Vec<TimeSeries<S>> = centroids.values().cloned().collect();
    let dist = DistanceMatrix::compute(&queries, &refs, metric)?;
    let predictions = (0..queries.len())
        .map(|i| {
            let row = dist.row(i);
            // first minimum wins, so equal distances go to the lowest id
            let best = (0..row.len()).fold(0, |b, j| if row[j] < row[b] { j } else { b });
            ids[best]
        })
        .collect();
    Ok(ClassifierResult::build(
        &truth,
        predictions,
        ids.iter().copied(),
    ))
}

/// Majority vote among the `k` nearest training samples (both sides warped
/// when a model is given). Vote ties go to the class with the smallest summed
/// neighbour distance, then to the lowest class id.
pub fn knn_classify<S: Scalar>(
    test: &Batch<S>,
    train: &Batch<S>,
    k: usize,
    model: Option<&ModelParams<S>>,
    metric: Metric,
) -> Result<ClassifierResult> {
    if k == 0 || k.is_multiple_of(2) {
        return invalid(format!("k must be odd, got {k}"));
    }
    if k > train.len() {
        return invalid(format!(
            "k = {k} exceeds the {} training samples",
            train.len()
        ));
    }
    let truth = test_labels(test)?;
    let train_labels = test_labels(train)?;
    let len = train.series_len();
    let queries = prepare_all(test.samples(), len, model)?;
    let refs = prepare_all(train.samples(), len, model)?;
    let dist = DistanceMatrix::compute(&queries, &refs, metric)?;
    let predictions = (0..queries.len())
        .map(|i| {
            let row = dist.row(i);
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            let mut votes: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
            for &j in &order[..k] {
                let e = votes.entry(train_labels[j]).or_insert((0, 0.0));
                e.0 += 1;
                e.1 += row[j];
            }
            votes
                .into_iter()
                .min_by(|(ca, (na, da)), (cb, (nb, db))| {
                    nb.cmp(na).then(da.total_cmp(db)).then(ca.cmp(cb))
                })
                .map(|(c, _)| c)
                .expect("k >= 1")
        })
        .collect();
    Ok(ClassifierResult::build(
        &truth,
        predictions,
        train_labels.iter().copied(),
    ))
}
