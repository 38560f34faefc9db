use serde::{Deserialize, Serialize};

use super::tessellation::Tessellation;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Raw slopes are clamped to `[-SLOPE_CLAMP, SLOPE_CLAMP]` before `exp`.
pub const SLOPE_CLAMP: f64 = 20.0;

/// Element-wise `exp` of clamped raw slopes; every output is strictly positive.
pub fn activate_slopes<S: Scalar>(raw: &[S]) -> Vec<S> {
    let c = S::lit(SLOPE_CLAMP);
    raw.iter().map(|&r| r.max(-c).min(c).exp()).collect()
}

/// Offsets `b` making the piecewise-affine field continuous at every border,
/// from the first offset and the slopes.
pub fn solve_offsets<S: Scalar>(
    tess: &Tessellation<S>,
    slopes: &[S],
    offset0: S,
) -> Result<Vec<S>> {
    if slopes.len() != tess.n_cells() {
        return invalid(format!(
            "{} slopes for {} cells",
            slopes.len(),
            tess.n_cells()
        ));
    }
    let mut offsets = Vec::with_capacity(slopes.len());
    offsets.push(offset0);
    for (i, &border) in tess.borders().iter().enumerate() {
        let prev = offsets[i];
        offsets.push((slopes[i] - slopes[i + 1]) * border + prev);
    }
    Ok(offsets)
}

/// Continuous piecewise-affine velocity field with positive slopes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct CpaVelocityField<S> {
    tess: Tessellation<S>,
    slopes: Vec<S>,
    offsets: Vec<S>,
}

impl<S: Scalar> CpaVelocityField<S> {
    pub fn new(tess: Tessellation<S>, slopes: Vec<S>, offset0: S) -> Result<Self> {
        if let Some(i) = slopes
            .iter()
            .position(|&a| !(a > S::zero() && a.is_finite()))
        {
            return invalid(format!("slope {i} is not strictly positive and finite"));
        }
        if !offset0.is_finite() {
            return invalid("offset is not finite");
        }
        let offsets = solve_offsets(&tess, &slopes, offset0)?;
        Ok(Self {
            tess,
            slopes,
            offsets,
        })
    }

    /// Field from unconstrained projection outputs (raw slopes through `exp`).
    pub fn from_raw(tess: Tessellation<S>, raw_slopes: &[S], offset0: S) -> Result<Self> {
        Self::new(tess, activate_slopes(raw_slopes), offset0)
    }

    pub fn tessellation(&self) -> &Tessellation<S> {
        &self.tess
    }

    pub fn slopes(&self) -> &[S] {
        &self.slopes
    }

    pub fn offsets(&self) -> &[S] {
        &self.offsets
    }

    pub fn offset0(&self) -> S {
        self.offsets[0]
    }

    /// Affine piece of cell `cell` evaluated at `x` (no clamping).
    pub fn eval_in_cell(&self, cell: usize, x: S) -> S {
        self.slopes[cell] * x + self.offsets[cell]
    }

    /// Velocity at `x`, with `x` clamped into `[0, 1]`.
    pub fn eval(&self, x: S) -> S {
        let x = x.max(S::zero()).min(S::one());
        self.eval_in_cell(self.tess.cell_of(x), x)
    }
}
