use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::labels::remap_labels;
use crate::error::{invalid, Error, Result};
use crate::objectives::Batch;
use crate::series::TimeSeries;

pub const DEFAULT_TARGET_LENGTH: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// A label given as a JSON string or number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelToken {
    Int(i64),
    Float(f64),
    Text(String),
}

impl LabelToken {
    fn token(&self) -> String {
        match self {
            LabelToken::Int(v) => v.to_string(),
            LabelToken::Float(v) => v.to_string(),
            LabelToken::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEntry {
    /// CSV path, relative to the manifest's directory.
    pub file: String,
    pub label: LabelToken,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub name: Option<String>,
    pub sequences: Vec<SequenceEntry>,
    #[serde(default = "default_target_length")]
    pub target_length: usize,
    #[serde(default)]
    pub z_normalize: bool,
}

fn default_target_length() -> usize {
    DEFAULT_TARGET_LENGTH
}

/// Parses a `T × d` CSV of per-frame feature vectors. A first line that is
/// not numeric is taken as a header.
pub fn parse_frames_csv(text: &str, location: &str) -> Result<Vec<Vec<f64>>> {
    let mut frames: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        let at = || format!("{location}:{}", i + 1);
        let frame = match parsed {
            Ok(f) => f,
            Err(_) if frames.is_empty() && i == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    location: at(),
                    message: e.to_string(),
                })
            }
        };
        if frame.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                location: at(),
                message: "non-finite value".into(),
            });
        }
        if let Some(first) = frames.first() {
            if first.len() != frame.len() {
                return Err(Error::Parse {
                    location: at(),
                    message: format!(
                        "row has {} columns, earlier rows have {}",
                        frame.len(),
                        first.len()
                    ),
                });
            }
        }
        frames.push(frame);
    }
    if frames.len() < 2 {
        return Err(Error::Parse {
            location: location.to_string(),
            message: "a sequence needs at least two frames".into(),
        });
    }
    Ok(frames)
}

/// Loads the sequences listed in a manifest, resampling each to the target
/// length and remapping labels to `0..K`.
pub fn load_multivariate(manifest_path: impl AsRef<Path>) -> Result<Dataset<f64>> {
    let manifest_path = manifest_path.as_ref();
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    if manifest.target_length < 2 {
        return invalid("target_length must be >= 2");
    }
    let tokens: Vec<String> = manifest.sequences.iter().map(|e| e.label.token()).collect();
    let (ids, names) = remap_labels(&tokens);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut channels: Option<usize> = None;
    for (entry, id) in manifest.sequences.iter().zip(ids) {
        let path = base.join(&entry.file);
        let frames = parse_frames_csv(
            &std::fs::read_to_string(&path)?,
            &path.display().to_string(),
        )?;
        let d = frames[0].len();
        match channels {
            None => channels = Some(d),
            Some(c) if c != d => {
                return invalid(format!(
                    "{} has {d} channels, earlier files have {c}",
                    entry.file
                ));
            }
            _ => {}
        }
        let mut s = TimeSeries::from_frames(&frames)?;
        if s.len() != manifest.target_length {
            s = s.resample(manifest.target_length)?;
        }
        if manifest.z_normalize {
            s = s.z_normalized();
        }
        let s = s.with_label(Some(id));
        match entry.split {
            Split::Train => train.push(s),
            Split::Test => test.push(s),
        }
    }
    if train.is_empty() || test.is_empty() {
        return invalid("manifest needs at least one train and one test sequence");
    }
    let name = manifest
        .name
        .clone()
        .or_else(|| {
            manifest_path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_string)
        })
        .unwrap_or_else(|| "multivariate".into());
    Dataset::new(name, Batch::new(train)?, Batch::new(test)?, names)
}
