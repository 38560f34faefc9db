use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::series::TimeSeries;

fn check_channels<S: Scalar>(x: &TimeSeries<S>, y: &TimeSeries<S>) -> Result<()> {
    if x.channels() != y.channels() {
        return invalid(format!(
            "channel mismatch: {} vs {}",
            x.channels(),
            y.channels()
        ));
    }
    Ok(())
}

/// Whether `(i, j)` lies within `band` of the length-scaled diagonal.
fn in_band(i: usize, j: usize, m: usize, n: usize, band: Option<usize>) -> bool {
    let Some(w) = band else { return true };
    let diag = if n > 1 {
        j as f64 * (m - 1) as f64 / (n - 1) as f64
    } else {
        0.0
    };
    (i as f64 - diag).abs() <= w as f64 + 1e-9
}

/// Cumulative-cost table, row-major `m × n`; cells outside the band are infinite.
fn cost_table<S: Scalar>(
    m: usize,
    n: usize,
    band: Option<usize>,
    cost: impl Fn(usize, usize) -> S,
) -> Result<Vec<S>> {
    if m == 0 || n == 0 {
        return invalid("DTW needs non-empty sequences");
    }
    let inf = S::infinity();
    let mut d = vec![inf; m * n];
    for i in 0..m {
        for j in 0..n {
            if !in_band(i, j, m, n, band) {
                continue;
            }
            let best = if i == 0 && j == 0 {
                S::zero()
            } else {
                let mut b = inf;
                if i > 0 && j > 0 {
                    b = b.min(d[(i - 1) * n + j - 1]);
                }
                if i > 0 {
                    b = b.min(d[(i - 1) * n + j]);
                }
                if j > 0 {
                    b = b.min(d[i * n + j - 1]);
                }
                b
            };
            d[i * n + j] = cost(i, j) + best;
        }
    }
    if !d[m * n - 1].is_finite() {
        return invalid(format!("Sakoe-Chiba band {band:?} admits no warping path"));
    }
    Ok(d)
}

fn series_table<S: Scalar>(
    x: &TimeSeries<S>,
    y: &TimeSeries<S>,
    band: Option<usize>,
) -> Result<Vec<S>> {
    check_channels(x, y)?;
    cost_table(x.len(), y.len(), band, |i, j| {
        (0..x.channels())
            .map(|c| {
                let d = x.row(c)[i] - y.row(c)[j];
                d * d
            })
            .sum()
    })
}

/// DTW distance between frame sequences, which unlike [`TimeSeries`] may
/// hold a single frame.
pub fn dtw_distance_frames<S: Scalar>(x: &[Vec<S>], y: &[Vec<S>]) -> Result<S> {
    let d = x.first().map_or(0, Vec::len);
    if x.iter().chain(y).any(|f| f.len() != d) {
        return invalid("all frames must have the same channel count");
    }
    let table: Vec<S> = cost_table(x.len(), y.len(), None, |i, j| {
        x[i].iter()
            .zip(&y[j])
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum()
    })?;
    Ok(table[table.len() - 1].sqrt())
}

/// Optimal cumulative squared frame cost and its path, from `(0, 0)` to
/// `(m-1, n-1)`. Ties prefer the diagonal step, then a step in `x`.
pub fn dtw_path<S: Scalar>(
    x: &TimeSeries<S>,
    y: &TimeSeries<S>,
    band: Option<usize>,
) -> Result<(S, Vec<(usize, usize)>)> {
    let d = series_table(x, y, band)?;
    let (m, n) = (x.len(), y.len());
    let (mut i, mut j) = (m - 1, n - 1);
    let mut path = vec![(i, j)];
    while i > 0 || j > 0 {
        let step = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = d[(i - 1) * n + j - 1];
            let up = d[(i - 1) * n + j];
            let left = d[i * n + j - 1];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        (i, j) = step;
        path.push(step);
    }
    path.reverse();
    Ok((d[m * n - 1], path))
}

/// Square root of the minimal cumulative squared-Euclidean frame cost over
/// monotone paths with steps (1,0), (0,1), (1,1).
pub fn dtw_distance<S: Scalar>(x: &TimeSeries<S>, y: &TimeSeries<S>) -> Result<S> {
    dtw_distance_banded(x, y, None)
}

/// [`dtw_distance`] restricted to a Sakoe–Chiba band of half-width `band`
/// around the length-scaled diagonal.
pub fn dtw_distance_banded<S: Scalar>(
    x: &TimeSeries<S>,
    y: &TimeSeries<S>,
    band: Option<usize>,
) -> Result<S> {
    let d = series_table(x, y, band)?;
    Ok(d[d.len() - 1].sqrt())
}
