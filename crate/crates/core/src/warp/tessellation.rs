use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Partition of `[0, 1]` into closed cells meeting at shared borders.
///
/// Only the interior borders are stored; cell `i` spans `[v_i, v_{i+1}]`
/// with `v_0 = 0` and `v_n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Tessellation<S> {
    borders: Vec<S>,
}

impl<S: Scalar> Tessellation<S> {
    pub fn uniform(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return invalid("tessellation needs at least one cell");
        }
        let n = S::from_usize_lossy(n_cells);
        let borders = (1..n_cells).map(|i| S::from_usize_lossy(i) / n).collect();
        Ok(Self { borders })
    }

    pub fn from_borders(borders: Vec<S>) -> Result<Self> {
        if borders.iter().any(|&b| !(b > S::zero() && b < S::one())) {
            return invalid("borders must lie in the open interval (0, 1)");
        }
        if borders.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("borders must be strictly increasing");
        }
        Ok(Self { borders })
    }

    pub fn n_cells(&self) -> usize {
        self.borders.len() + 1
    }

    pub fn borders(&self) -> &[S] {
        &self.borders
    }

    /// Left vertex of cell `i`.
    pub fn left(&self, i: usize) -> S {
        if i == 0 {
            S::zero()
        } else {
            self.borders[i - 1]
        }
    }

    /// Right vertex of cell `i`.
    pub fn right(&self, i: usize) -> S {
        if i + 1 == self.n_cells() {
            S::one()
        } else {
            self.borders[i]
        }
    }

    pub fn center(&self, i: usize) -> S {
        (self.left(i) + self.right(i)) / S::lit(2.0)
    }

    /// Index of the cell containing `x`; borders belong to the right-hand cell,
    /// and points outside `[0, 1]` map to the nearest boundary cell.
    pub fn cell_of(&self, x: S) -> usize {
        self.borders.partition_point(|&b| b <= x)
    }
}
