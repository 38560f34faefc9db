//! Piecewise-linear interpolation helpers shared by resampling and warping.

use crate::scalar::Scalar;

/// Position `pos`, split into a left sample index and a fractional weight.
///
/// Positions within a few ulps of an integer index snap to it, so a warp that
/// is the identity up to rounding reads samples back bit-exactly.
pub fn split_index<S: Scalar>(pos: S, len: usize) -> (usize, S) {
    debug_assert!(len >= 2);
    let last = S::from_usize_lossy(len - 1);
    let pos = pos.max(S::zero()).min(last);
    let nearest = pos.round();
    let tol = S::epsilon() * S::lit(8.0) * last.max(S::one());
    let (base, frac) = if (pos - nearest).abs() <= tol {
        (nearest, S::zero())
    } else {
        let f = pos.floor();
        (f, pos - f)
    };
    let mut i0 = base.to_usize().unwrap_or(0);
    let mut frac = frac;
    if i0 >= len - 1 {
        i0 = len - 2;
        frac = S::one();
    }
    (i0, frac)
}

/// Linear interpolation of `row` at continuous index `pos`, clamped to the row.
pub fn lerp_index<S: Scalar>(row: &[S], pos: S) -> S {
    let (i0, w) = split_index(pos, row.len());
    if w == S::zero() {
        row[i0]
    } else if w == S::one() {
        row[i0 + 1]
    } else {
        row[i0] + w * (row[i0 + 1] - row[i0])
    }
}

/// Linear resampling of one row to `new_len` uniformly spaced points.
pub fn resample_row<S: Scalar>(row: &[S], new_len: usize) -> Vec<S> {
    let old = row.len();
    if new_len == old {
        return row.to_vec();
    }
    let num = S::from_usize_lossy(old - 1);
    let den = S::from_usize_lossy(new_len - 1);
    (0..new_len)
        .map(|j| lerp_index(row, S::from_usize_lossy(j) * num / den))
        .collect()
}

/// Evaluates the piecewise-linear interpolant through `(xs, ys)` at `x`.
///
/// `xs` must be strictly increasing; queries outside the knots are clamped.
pub fn interp_knots<S: Scalar>(xs: &[S], ys: &[S], x: S) -> S {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[k] > x
    let k = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[k - 1], xs[k]);
    if x == x0 {
        return ys[k - 1];
    }
    let w = (x - x0) / (x1 - x0);
    ys[k - 1] + w * (ys[k] - ys[k - 1])
}
