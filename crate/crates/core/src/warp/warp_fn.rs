use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::interp::{interp_knots, lerp_index};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

/// `j / (n - 1)`; the one place grid coordinates are computed.
pub fn grid_point<S: Scalar>(j: usize, n: usize) -> S {
    S::from_usize_lossy(j) / S::from_usize_lossy(n - 1)
}

pub fn uniform_grid<S: Scalar>(n: usize) -> Vec<S> {
    (0..n).map(|j| grid_point(j, n)).collect()
}

/// A strictly increasing map of `[0, 1]` onto itself, sampled on the uniform
/// grid `tau_j = j / (n - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpFunction<S> {
    values: Vec<S>,
}

#[derive(Serialize, Deserialize)]
struct WarpRecord {
    grid_size: usize,
    values: Vec<f64>,
}

impl<S: Scalar> WarpFunction<S> {
    pub fn identity(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("warp grid size {n} < 2"));
        }
        Ok(Self {
            values: uniform_grid(n),
        })
    }

    /// Validates monotonicity and the fixed endpoints.
    pub fn from_values(values: Vec<S>) -> Result<Self> {
        check_warp_values(&values)?;
        Ok(Self { values })
    }

    /// Samples a continuous warp on an `n`-point grid.
    pub fn from_fn(n: usize, f: impl Fn(S) -> S) -> Result<Self> {
        if n < 2 {
            return invalid(format!("warp grid size {n} < 2"));
        }
        Self::from_values(uniform_grid(n).into_iter().map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn grid(&self) -> Vec<S> {
        uniform_grid(self.values.len())
    }

    /// Evaluates the piecewise-linear interpolant at `x` in `[0, 1]`.
    pub fn eval(&self, x: S) -> S {
        lerp_index(&self.values, x * S::from_usize_lossy(self.len() - 1))
    }

    /// The same warp on an `n`-point grid (linear interpolation).
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n == self.len() {
            return Ok(self.clone());
        }
        Self::from_fn(n, |x| self.eval(x))
    }

    /// `sup_j |self_j - other_j|` on a shared grid.
    pub fn sup_distance(&self, other: &Self) -> Result<S> {
        if self.len() != other.len() {
            return invalid("warps sampled on different grids");
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).abs())
            .fold(S::zero(), S::max))
    }

    /// `sup |gamma - id|`.
    pub fn deviation_from_identity(&self) -> S {
        self.values
            .iter()
            .enumerate()
            .map(|(j, &v)| (v - grid_point::<S>(j, self.len())).abs())
            .fold(S::zero(), S::max)
    }

    /// `series ∘ gamma`: each channel read at continuous index `gamma(tau_j) (T - 1)`.
    pub fn apply(&self, series: &TimeSeries<S>) -> Result<TimeSeries<S>> {
        let warp = self.resample(series.len())?;
        let last = S::from_usize_lossy(series.len() - 1);
        let mut data = Vec::with_capacity(series.data().len());
        for row in series.rows() {
            data.extend(warp.values.iter().map(|&g| lerp_index(row, g * last)));
        }
        Ok(TimeSeries::new(series.channels(), series.len(), data)?.with_label(series.label()))
    }

    /// `self ∘ inner`, sampled on the shared grid.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if self.len() != inner.len() {
            return invalid("composition requires a shared grid");
        }
        let mut values: Vec<S> = inner.values.iter().map(|&x| self.eval(x)).collect();
        let n = values.len();
        values[0] = S::zero();
        values[n - 1] = S::one();
        Self::from_values(values)
    }

    /// Numerical inverse: the interpolant with axes swapped, resampled on the grid.
    pub fn invert(&self) -> Result<Self> {
        let n = self.len();
        let grid = uniform_grid::<S>(n);
        let mut values: Vec<S> = grid
            .iter()
            .map(|&y| interp_knots(&self.values, &grid, y))
            .collect();
        values[0] = S::zero();
        values[n - 1] = S::one();
        Self::from_values(values)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,gamma\n");
        for (j, v) in self.values.iter().enumerate() {
            let tau: S = grid_point(j, self.len());
            let _ = writeln!(out, "{},{}", tau.to_f64_lossy(), v.to_f64_lossy());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if i == 0 && line.starts_with("tau") || line.is_empty() {
                continue;
            }
            let gamma = line.split(',').nth(1).ok_or_else(|| Error::Parse {
                location: format!("line {}", i + 1),
                message: "expected two columns".into(),
            })?;
            let v: f64 = gamma.trim().parse().map_err(|_| Error::Parse {
                location: format!("line {}", i + 1),
                message: format!("not a number: {gamma}"),
            })?;
            values.push(S::lit(v));
        }
        Self::from_values(values)
    }

    pub fn to_json(&self) -> String {
        let record = WarpRecord {
            grid_size: self.len(),
            values: self.values.iter().map(|v| v.to_f64_lossy()).collect(),
        };
        serde_json::to_string(&record).expect("warp record serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: WarpRecord = serde_json::from_str(text)?;
        if record.grid_size != record.values.len() {
            return invalid(format!(
                "grid_size {} but {} values",
                record.grid_size,
                record.values.len()
            ));
        }
        Self::from_values(record.values.into_iter().map(S::lit).collect())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub(crate) fn check_warp_values<S: Scalar>(values: &[S]) -> Result<()> {
    let n = values.len();
    if n < 2 {
        return invalid(format!("warp grid size {n} < 2"));
    }
    if values[0] != S::zero() || values[n - 1] != S::one() {
        return Err(Error::InvariantViolation(format!(
            "warp endpoints are ({}, {}), expected (0, 1)",
            values[0],
            values[n - 1]
        )));
    }
    check_strictly_increasing(values)
}

pub(crate) fn check_strictly_increasing<S: Scalar>(values: &[S]) -> Result<()> {
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvariantViolation(format!(
            "non-finite warp value at {j}"
        )));
    }
    if let Some(j) = values.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::InvariantViolation(format!(
            "warp not strictly increasing at index {j}: {} >= {}",
            values[j],
            values[j + 1]
        )));
    }
    Ok(())
}

pub(crate) fn check_non_decreasing<S: Scalar>(values: &[S]) -> Result<()> {
    if let Some(j) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvariantViolation(format!(
            "non-finite warp value at {j}"
        )));
    }
    if let Some(j) = values.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::InvariantViolation(format!(
            "warp decreasing at index {j}: {} > {}",
            values[j],
            values[j + 1]
        )));
    }
    Ok(())
}
