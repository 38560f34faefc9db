//! Dense symmetric positive-definite helpers for small matrices.

use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Compensated accumulator: sums products as if in twice the working
/// precision, then rounds once.
struct Dot2<S> {
    sum: S,
    comp: S,
}

impl<S: Scalar> Dot2<S> {
    fn new(init: S) -> Self {
        Self {
            sum: init,
            comp: S::zero(),
        }
    }

    fn add_product(&mut self, a: S, b: S) {
        let p = a * b;
        let perr = a.mul_add(b, -p);
        let s = self.sum + p;
        let z = s - self.sum;
        let serr = (self.sum - (s - z)) + (p - z);
        self.sum = s;
        self.comp += serr + perr;
    }

    fn value(&self) -> S {
        self.sum + self.comp
    }
}

/// Lower-triangular Cholesky factor of a row-major `n × n` matrix.
pub fn cholesky<S: Scalar>(a: &[S], n: usize) -> Result<Vec<S>> {
    if a.len() != n * n {
        return invalid(format!("expected {n}x{n} matrix"));
    }
    let mut l = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Dot2::new(a[i * n + j]);
            for k in 0..j {
                acc.add_product(-l[i * n + k], l[j * n + k]);
            }
            let s = acc.value();
            if i == j {
                if !(s > S::zero()) || !s.is_finite() {
                    return invalid(format!("matrix not positive definite (pivot {i})"));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(l)
}

/// Inverse of an SPD matrix as `L^{-T} L^{-1}` from its Cholesky factor.
/// The result is symmetric by construction.
pub fn spd_inverse<S: Scalar>(a: &[S], n: usize) -> Result<Vec<S>> {
    let l = cholesky(a, n)?;
    // Lower-triangular M = L^{-1}, column by column.
    let mut m = vec![S::zero(); n * n];
    for col in 0..n {
        m[col * n + col] = S::one() / l[col * n + col];
        for i in col + 1..n {
            let mut acc = Dot2::new(S::zero());
            for k in col..i {
                acc.add_product(-l[i * n + k], m[k * n + col]);
            }
            m[i * n + col] = acc.value() / l[i * n + i];
        }
    }
    let mut inv = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Dot2::new(S::zero());
            for k in i..n {
                acc.add_product(m[k * n + i], m[k * n + j]);
            }
            inv[i * n + j] = acc.value();
            inv[j * n + i] = acc.value();
        }
    }
    Ok(inv)
}

pub fn is_symmetric<S: Scalar>(a: &[S], n: usize) -> bool {
    (0..n).all(|i| (0..i).all(|j| a[i * n + j] == a[j * n + i]))
}

/// `x^T A x`.
pub fn quadratic_form<S: Scalar>(a: &[S], x: &[S]) -> S {
    let n = x.len();
    let mut total = S::zero();
    for i in 0..n {
        let mut row = S::zero();
        for j in 0..n {
            row += a[i * n + j] * x[j];
        }
        total += x[i] * row;
    }
    total
}

pub fn matmul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}
