//! Versioned binary parameter container.
//!
//! Layout: 4-byte little-endian header length, UTF-8 JSON header
//! `{config, seed, format_version}`, then every parameter as a little-endian
//! `f64` in declaration order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::params::ModelParams;
use crate::autodiff::Tensor;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config: ModelConfig,
    pub seed: u64,
    pub format_version: u32,
}

pub fn to_bytes<S: Scalar>(params: &ModelParams<S>) -> Vec<u8> {
    let header = CheckpointHeader {
        config: params.config().clone(),
        seed: params.config().seed,
        format_version: FORMAT_VERSION,
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(4 + json.len() + 8 * params.n_values());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for t in params.tensors() {
        for v in t.data() {
            out.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
    }
    out
}

pub fn from_bytes<S: Scalar>(bytes: &[u8]) -> Result<ModelParams<S>> {
    if bytes.len() < 4 {
        return invalid("checkpoint truncated before header length");
    }
    let hlen = u32::from_le_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if bytes.len() < 4 + hlen {
        return invalid("checkpoint truncated inside header");
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[4..4 + hlen])?;
    if header.format_version != FORMAT_VERSION {
        return invalid(format!(
            "unsupported checkpoint version {}",
            header.format_version
        ));
    }
    let shapes = ModelParams::<S>::shapes(&header.config);
    let total: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let body = &bytes[4 + hlen..];
    if body.len() != total * 8 {
        return invalid(format!(
            "checkpoint holds {} bytes of values, config needs {}",
            body.len(),
            total * 8
        ));
    }
    let mut values = body
        .chunks_exact(8)
        .map(|c| S::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))));
    let tensors = shapes
        .iter()
        .map(|s| {
            let n = s.iter().product();
            Tensor::new(s, values.by_ref().take(n).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    ModelParams::from_tensors(&header.config, tensors)
}

pub fn save<S: Scalar>(params: &ModelParams<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(params))?;
    Ok(())
}

pub fn load<S: Scalar>(path: impl AsRef<Path>) -> Result<ModelParams<S>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}
