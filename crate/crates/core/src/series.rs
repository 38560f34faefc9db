//! Multichannel real-valued sequences on the unit time domain.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::interp::{lerp_index, resample_row};
use crate::scalar::Scalar;

/// A `channels × len` sequence stored channel-major, with an optional class id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct TimeSeries<S> {
    channels: usize,
    len: usize,
    data: Vec<S>,
    label: Option<usize>,
}

impl<S: Scalar> TimeSeries<S> {
    pub fn new(channels: usize, len: usize, data: Vec<S>) -> Result<Self> {
        if channels == 0 {
            return invalid("time series needs at least one channel");
        }
        if len < 2 {
            return invalid(format!("time series length {len} < 2"));
        }
        if data.len() != channels * len {
            return invalid(format!(
                "data length {} does not match {channels}x{len}",
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value at flat index {i}"));
        }
        Ok(Self {
            channels,
            len,
            data,
            label: None,
        })
    }

    pub fn univariate(values: Vec<S>) -> Result<Self> {
        let len = values.len();
        Self::new(1, len, values)
    }

    /// Builds a series from per-channel rows.
    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let channels = rows.len();
        let len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != len) {
            return invalid("ragged channel rows");
        }
        Self::new(channels, len, rows.concat())
    }

    /// Builds a series from per-frame vectors (`len` rows of `channels` values).
    pub fn from_frames(frames: &[Vec<S>]) -> Result<Self> {
        let len = frames.len();
        let channels = frames.first().map_or(0, Vec::len);
        if frames.iter().any(|f| f.len() != channels) {
            return invalid("ragged frames");
        }
        let mut data = vec![S::zero(); channels * len];
        for (t, frame) in frames.iter().enumerate() {
            for (c, &v) in frame.iter().enumerate() {
                data[c * len + t] = v;
            }
        }
        Self::new(channels, len, data)
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn row(&self, channel: usize) -> &[S] {
        &self.data[channel * self.len..(channel + 1) * self.len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.data.chunks(self.len)
    }

    pub fn frame(&self, t: usize) -> Vec<S> {
        (0..self.channels)
            .map(|c| self.data[c * self.len + t])
            .collect()
    }

    /// Squared Euclidean distance over all channels and samples.
    pub fn squared_distance(&self, other: &Self) -> Result<S> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum())
    }

    pub fn euclidean_distance(&self, other: &Self) -> Result<S> {
        Ok(self.squared_distance(other)?.sqrt())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.channels != other.channels || self.len != other.len {
            return invalid(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.channels, self.len, other.channels, other.len
            ));
        }
        Ok(())
    }

    /// Linearly resamples every channel to `new_len` points; endpoints are kept exactly.
    pub fn resample(&self, new_len: usize) -> Result<Self> {
        if new_len < 2 {
            return invalid(format!("target length {new_len} < 2"));
        }
        if new_len == self.len {
            return Ok(self.clone());
        }
        let data: Vec<S> = self
            .rows()
            .flat_map(|row| resample_row(row, new_len))
            .collect();
        Ok(Self::new(self.channels, new_len, data)?.with_label(self.label))
    }

    /// Reads every channel at a continuous sample index.
    pub fn sample_at(&self, pos: S) -> Vec<S> {
        self.rows().map(|row| lerp_index(row, pos)).collect()
    }

    /// Stacks channels of `self` on top of `other` (equal lengths required).
    pub fn concat_channels(&self, other: &Self) -> Result<Self> {
        if self.len != other.len {
            return invalid(format!("length mismatch {} vs {}", self.len, other.len));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::new(self.channels + other.channels, self.len, data)
    }

    /// Per-series z-normalisation, every channel pooled; variance floored at `1e-8`.
    pub fn z_normalized(&self) -> Self {
        let n = S::from_usize_lossy(self.data.len());
        let mean = self.data.iter().copied().sum::<S>() / n;
        let var = self
            .data
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<S>()
            / n;
        let std = var.max(S::lit(1e-8)).sqrt();
        let data = self.data.iter().map(|&v| (v - mean) / std).collect();
        Self {
            data,
            ..self.clone()
        }
    }

    pub fn map_values(&self, f: impl Fn(S) -> S) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }
}
