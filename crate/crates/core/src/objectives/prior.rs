use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{cholesky, is_symmetric, spd_inverse};
use crate::scalar::Scalar;
use crate::warp::Tessellation;

/// Diagonal jitter, relative to `lambda_var`.
pub const JITTER: f64 = 1e-6;

/// Symmetric positive-definite `N_T × N_T` precision matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct Precision<S> {
    n: usize,
    matrix: Vec<S>,
}

impl<S: Scalar> Precision<S> {
    pub fn new(matrix: Vec<S>, n: usize) -> Result<Self> {
        if matrix.len() != n * n || n == 0 {
            return invalid(format!("precision must be a non-empty {n}x{n} matrix"));
        }
        if !is_symmetric(&matrix, n) {
            return invalid("precision matrix is not symmetric");
        }
        cholesky(&matrix, n)?;
        Ok(Self { n, matrix })
    }

    pub fn identity(n: usize) -> Self {
        let mut matrix = vec![S::zero(); n * n];
        for i in 0..n {
            matrix[i * n + i] = S::one();
        }
        Self { n, matrix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[S] {
        &self.matrix
    }
}

/// Gaussian prior over a block's slope vector whose correlations decay with
/// the distance between cell centres.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Serialize"))]
pub struct SigmaPrior<S> {
    pub lambda_var: S,
    pub lambda_smooth: S,
    pub n_cells: usize,
    pub covariance: Vec<S>,
    pub precision: Precision<S>,
}

/// `Σ_ij = λ_var exp(-(c_i - c_j)² / (2 λ_smooth²)) + jitter λ_var δ_ij`.
pub fn build_sigma<S: Scalar>(
    lambda_var: S,
    lambda_smooth: S,
    n_cells: usize,
) -> Result<SigmaPrior<S>> {
    if !(lambda_var > S::zero()) || !(lambda_smooth > S::zero()) {
        return invalid("lambda_var and lambda_smooth must be positive");
    }
    let tess = Tessellation::<S>::uniform(n_cells)?;
    let n = n_cells;
    let two = S::lit(2.0);
    let mut cov = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let d = tess.center(i) - tess.center(j);
            let mut v = lambda_var * (-(d * d) / (two * lambda_smooth * lambda_smooth)).exp();
            if i == j {
                v += S::lit(JITTER) * lambda_var;
            }
            cov[i * n + j] = v;
        }
    }
    let inv = spd_inverse(&cov, n)?;
    Ok(SigmaPrior {
        lambda_var,
        lambda_smooth,
        n_cells,
        covariance: cov,
        precision: Precision::new(inv, n)?,
    })
}
