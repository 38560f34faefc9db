use std::path::Path;

use super::dataset::Dataset;
use super::labels::remap_labels;
use crate::error::{Error, Result};
use crate::objectives::Batch;
use crate::series::TimeSeries;

fn parse_err(location: String, message: impl Into<String>) -> Error {
    Error::Parse {
        location,
        message: message.into(),
    }
}

fn split_tokens(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').collect()
    } else if line.contains(',') {
        line.split(',').collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Parses one archive row: a class label followed by the values, separated
/// by tabs, commas or whitespace. `row` is 1-based and only used in errors.
pub fn parse_ucr_row(line: &str, location: &str, row: usize) -> Result<(String, Vec<f64>)> {
    let tokens = split_tokens(line.trim_end_matches(['\r', '\n']));
    let at = || format!("{location}:{row}");
    let (label, rest) = tokens
        .split_first()
        .ok_or_else(|| parse_err(at(), "empty row"))?;
    let label = label.trim();
    label
        .parse::<f64>()
        .map_err(|_| parse_err(at(), format!("label {label:?} is not numeric")))?;
    let values = rest
        .iter()
        .enumerate()
        .map(|(c, t)| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(
                    at(),
                    format!("column {}: {t:?} is not a finite number", c + 2),
                )),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() < 2 {
        return Err(parse_err(at(), "a series needs at least two values"));
    }
    Ok((label.to_string(), values))
}

/// Parses a whole archive file; every row must have the same length.
pub fn parse_ucr(text: &str, location: &str) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed = parse_ucr_row(line, location, i + 1)?;
        if let Some((_, first)) = rows.first() {
            if parsed.1.len() != first.len() {
                return Err(parse_err(
                    format!("{location}:{}", i + 1),
                    format!(
                        "row has {} values, earlier rows have {}",
                        parsed.1.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(parsed);
    }
    if rows.is_empty() {
        return Err(parse_err(location.to_string(), "no rows"));
    }
    Ok(rows)
}

/// Builds a dataset from parsed rows. Labels are remapped to `0..K` across
/// both splits, test series are resampled to the training length if they
/// differ, and each series is z-normalised when `z_normalize` is set.
pub fn ucr_dataset(
    name: &str,
    train: Vec<(String, Vec<f64>)>,
    test: Vec<(String, Vec<f64>)>,
    z_normalize: bool,
) -> Result<Dataset<f64>> {
    let tokens: Vec<String> = train.iter().chain(&test).map(|(l, _)| l.clone()).collect();
    let (ids, names) = remap_labels(&tokens);
    let len = train[0].1.len();
    let build = |rows: Vec<(String, Vec<f64>)>, ids: &[usize]| -> Result<Batch<f64>> {
        let samples = rows
            .into_iter()
            .zip(ids)
            .map(|((_, values), &id)| {
                let mut s = TimeSeries::univariate(values)?;
                if s.len() != len {
                    s = s.resample(len)?;
                }
                if z_normalize {
                    s = s.z_normalized();
                }
                Ok(s.with_label(Some(id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Batch::new(samples)
    };
    let n_train = train.len();
    let train = build(train, &ids[..n_train])?;
    let test = build(test, &ids[n_train..])?;
    Dataset::new(name, train, test, names)
}

/// Loads an archive train/test pair. The dataset is named after the train
/// file's stem with any `_TRAIN` suffix removed.
pub fn load_ucr(
    train_path: impl AsRef<Path>,
    test_path: impl AsRef<Path>,
    z_normalize: bool,
) -> Result<Dataset<f64>> {
    let (train_path, test_path) = (train_path.as_ref(), test_path.as_ref());
    let train = parse_ucr(
        &std::fs::read_to_string(train_path)?,
        &train_path.display().to_string(),
    )?;
    let test = parse_ucr(
        &std::fs::read_to_string(test_path)?,
        &test_path.display().to_string(),
    )?;
    let stem = train_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ucr");
    let name = stem.strip_suffix("_TRAIN").unwrap_or(stem);
    ucr_dataset(name, train, test, z_normalize)
}
