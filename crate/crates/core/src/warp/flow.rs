//! Euler integration of a sequence of velocity fields into a warp.

use super::velocity::CpaVelocityField;
use super::warp_fn::{check_non_decreasing, check_strictly_increasing, WarpFunction};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Spans below this are treated as a collapsed warp.
pub const MIN_SPAN: f64 = 1e-12;

/// One residual update `x_j + v(x_j)` of the particle positions.
///
/// The result is an unscaled intermediate, not yet pinned to `[0, 1]`. The
/// map `x -> x + v(x)` is strictly increasing, but when the velocity dwarfs
/// the spacing of neighbouring particles their sums can round to the same
/// value, so only non-decreasing order is checked here.
pub fn euler_step<S: Scalar>(positions: &[S], field: &CpaVelocityField<S>) -> Result<Vec<S>> {
    check_strictly_increasing(positions)?;
    let out: Vec<S> = positions.iter().map(|&x| x + field.eval(x)).collect();
    check_non_decreasing(&out)?;
    Ok(out)
}

/// Restores strict order on scaled values whose neighbours rounded onto each
/// other, moving them by the fewest ulps possible. Endpoints stay fixed.
/// Returns whether anything moved.
pub fn enforce_strict<S: Scalar>(values: &mut [S]) -> bool {
    let n = values.len();
    let mut moved = false;
    for j in 1..n.saturating_sub(1) {
        if values[j] <= values[j - 1] {
            values[j] = values[j - 1].next_above();
            moved = true;
        }
    }
    for j in (1..n.saturating_sub(1)).rev() {
        if values[j] >= values[j + 1] {
            values[j] = values[j + 1].next_below();
            moved = true;
        }
    }
    moved
}

/// Affinely maps non-decreasing positions onto `[0, 1]`, then separates any
/// samples that rounding left equal.
pub fn boundary_scale<S: Scalar>(positions: &[S]) -> Result<WarpFunction<S>> {
    check_non_decreasing(positions)?;
    let n = positions.len();
    if n < 2 {
        return invalid("need at least two positions");
    }
    let first = positions[0];
    let span = positions[n - 1] - first;
    if span.to_f64_lossy() < MIN_SPAN {
        return Err(Error::DegenerateWarp(span.to_f64_lossy()));
    }
    let mut values: Vec<S> = positions.iter().map(|&x| (x - first) / span).collect();
    enforce_strict(&mut values);
    WarpFunction::from_values(values)
}

/// Integrates the fields from the identity on an `n`-point grid.
///
/// Every block's update is followed by a boundary scaling, so each
/// intermediate warp is itself a diffeomorphism of `[0, 1]` and the next
/// field acts on the whole domain.
pub fn integrate_warp_path<S: Scalar>(
    fields: &[CpaVelocityField<S>],
    n: usize,
) -> Result<Vec<WarpFunction<S>>> {
    if fields.is_empty() {
        return invalid("need at least one velocity field");
    }
    let tess = fields[0].tessellation();
    if fields.iter().any(|f| f.tessellation() != tess) {
        return invalid("all velocity fields must share one tessellation");
    }
    let mut gamma = WarpFunction::identity(n)?;
    let mut path = Vec::with_capacity(fields.len());
    for field in fields {
        gamma = boundary_scale(&euler_step(gamma.values(), field)?)?;
        path.push(gamma.clone());
    }
    Ok(path)
}

pub fn integrate_warp<S: Scalar>(
    fields: &[CpaVelocityField<S>],
    n: usize,
) -> Result<WarpFunction<S>> {
    Ok(integrate_warp_path(fields, n)?
        .pop()
        .expect("non-empty path"))
}
