//! Reading series, warps, prototypes and datasets from disk.
//!
//! Single series and warps are addressed as `FILE` or `FILE#SELECTOR`:
//! `data.json#train:3` picks a sample of a dataset, `protos.json#2` an entry
//! of a series list and `warps.csv#test:0` one warp of a long-form
//! ground-truth CSV.

use std::path::Path;

use anyhow::Context as _;
use serde_json::Value;

use resnet_tw::data::{load_multivariate, load_ucr, parse_frames_csv, Dataset};
use resnet_tw::objectives::Batch;
use resnet_tw::warp::WarpFunction;
use resnet_tw::TimeSeries;

use crate::args::DataArgs;
use crate::errors::invalid;

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn split_spec(spec: &str) -> (&str, Option<&str>) {
    match spec.rsplit_once('#') {
        Some((file, sel)) => (file, Some(sel)),
        None => (spec, None),
    }
}

/// `train:3` or `test:0`.
fn split_selector(sel: &str) -> anyhow::Result<(&str, usize)> {
    let (split, index) = sel
        .split_once(':')
        .ok_or_else(|| invalid(format!("selector {sel} should look like train:3")))?;
    if split != "train" && split != "test" {
        return Err(invalid(format!("unknown split {split} (train or test)")));
    }
    let index = index
        .parse()
        .map_err(|_| invalid(format!("bad sample index in {sel}")))?;
    Ok((split, index))
}

fn index_selector(sel: &str) -> anyhow::Result<usize> {
    sel.parse()
        .map_err(|_| invalid(format!("selector {sel} should be an index")))
}

/// Deserialises a series and re-checks its shape.
fn series_from_value(v: Value) -> anyhow::Result<TimeSeries<f64>> {
    let s: TimeSeries<f64> = serde_json::from_value(v)?;
    let label = s.label();
    Ok(TimeSeries::new(s.channels(), s.len(), s.into_data())?.with_label(label))
}

fn series_list(v: Value) -> anyhow::Result<Vec<TimeSeries<f64>>> {
    let items = match v {
        Value::Array(items) => items,
        Value::Object(mut map) if map.contains_key("samples") => match map.remove("samples") {
            Some(Value::Array(items)) => items,
            _ => return Err(invalid("`samples` must be a list")),
        },
        _ => {
            return Err(invalid(
                "expected a list of series or an object with `samples`",
            ))
        }
    };
    items.into_iter().map(series_from_value).collect()
}

fn pick<T>(items: Vec<T>, index: usize, what: &str) -> anyhow::Result<T> {
    let n = items.len();
    items.into_iter().nth(index).ok_or_else(|| {
        invalid(format!(
            "{what} has {n} entries, index {index} is out of range"
        ))
    })
}

/// One series from a frames CSV (`T` rows of `d` values), a series JSON, a
/// series list (`#i`) or a dataset (`#split:i`).
pub fn load_series(spec: &str) -> anyhow::Result<TimeSeries<f64>> {
    let (file, sel) = split_spec(spec);
    let path = Path::new(file);
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let value: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {file}"))?;
        let is_dataset = value.get("train").is_some() && value.get("test").is_some();
        return match (is_dataset, sel) {
            (true, Some(sel)) => {
                let ds = Dataset::from_json(&text)?;
                let (split, i) = split_selector(sel)?;
                let batch = if split == "train" { ds.train } else { ds.test };
                pick(batch.into_samples(), i, &format!("{file} {split}"))
            }
            (true, None) => Err(invalid(format!(
                "{file} is a dataset; select a sample with #train:i"
            ))),
            (false, Some(sel)) => pick(series_list(value)?, index_selector(sel)?, file),
            (false, None) if value.is_object() && value.get("samples").is_none() => {
                series_from_value(value)
            }
            (false, None) => Err(invalid(format!(
                "{file} holds several series; select one with #i"
            ))),
        };
    }
    if sel.is_some() {
        return Err(invalid(format!(
            "selectors apply to JSON files, not {file}"
        )));
    }
    Ok(TimeSeries::from_frames(&parse_frames_csv(&text, file)?)?)
}

/// A warp from `tau,gamma` CSV, a warp JSON, or one entry of a long-form
/// `split,sample,tau,gamma` CSV (`#split:i`).
pub fn load_warp(spec: &str) -> anyhow::Result<WarpFunction<f64>> {
    let (file, sel) = split_spec(spec);
    let path = Path::new(file);
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        if sel.is_some() {
            return Err(invalid("warp JSON files hold one warp; drop the selector"));
        }
        return Ok(WarpFunction::from_json(&text)?);
    }
    let header = text.lines().next().unwrap_or("").trim();
    if !header.starts_with("split") {
        if sel.is_some() {
            return Err(invalid(format!("{file} holds one warp; drop the selector")));
        }
        return Ok(WarpFunction::from_csv(&text)?);
    }
    let sel = sel.ok_or_else(|| {
        invalid(format!(
            "{file} holds several warps; select one with #train:i"
        ))
    })?;
    let (split, index) = split_selector(sel)?;
    let mut values = Vec::new();
    for (row, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != 4 {
            if line.trim().is_empty() {
                continue;
            }
            return Err(invalid(format!("{file}:{}: expected 4 columns", row + 1)));
        }
        if cols[0] == split && cols[1].parse::<usize>().ok() == Some(index) {
            let g: f64 = cols[3]
                .parse()
                .map_err(|_| invalid(format!("{file}:{}: not a number: {}", row + 1, cols[3])))?;
            values.push(g);
        }
    }
    if values.is_empty() {
        return Err(invalid(format!("{file} has no warp {sel}")));
    }
    Ok(WarpFunction::from_values(values)?)
}

/// Prototypes from a JSON list of series (or `{"samples": [...]}`). When no
/// prototype carries a label they are labelled by position.
pub fn load_prototypes(path: &Path) -> anyhow::Result<Batch<f64>> {
    let text = read(path)?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mut samples = series_list(value)?;
    if samples.iter().all(|s| s.label().is_none()) {
        samples = samples
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.with_label(Some(i)))
            .collect();
    }
    Ok(Batch::new(samples)?)
}

pub fn load_dataset(args: &DataArgs) -> anyhow::Result<Dataset<f64>> {
    if let Some(path) = &args.dataset {
        return Dataset::load(path).with_context(|| format!("loading {}", path.display()));
    }
    if let (Some(train), Some(test)) = (&args.ucr_train, &args.ucr_test) {
        return Ok(load_ucr(train, test, !args.no_znorm)?);
    }
    if let Some(manifest) = &args.manifest {
        return Ok(load_multivariate(manifest)?);
    }
    Err(invalid(
        "no data given: use --dataset, --ucr-train/--ucr-test or --manifest",
    ))
}
