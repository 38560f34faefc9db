use serde::Serialize;

use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Relative errors use `max(|analytic|, |numeric|, DENOM_FLOOR)` as denominator.
pub const DENOM_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct WorstCoordinate {
    pub leaf: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradcheckReport {
    pub max_rel_error: f64,
    pub tol: f64,
    pub eps: f64,
    pub checked: usize,
    /// Coordinates whose `±eps` probes crossed a ReLU/clamp/cell/index boundary.
    pub skipped_kinks: usize,
    pub worst: Option<WorstCoordinate>,
    pub passed: bool,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(DENOM_FLOOR);
    (analytic - numeric).abs() / denom
}

fn evaluate<S, F>(f: &F, leaves: &[Tensor<S>]) -> Result<(S, Vec<u64>)>
where
    S: Scalar,
    F: Fn(&mut Tape<S>, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = leaves.iter().map(|t| tape.constant(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    tape.ensure_finite()?;
    Ok((tape.value(out).item(), tape.branch_signature()))
}

/// Compares reverse-mode gradients of the scalar built by `f` with central
/// differences `(f(x + eps) - f(x - eps)) / (2 eps)`, coordinate by coordinate.
pub fn gradcheck<S, F>(f: F, leaves: &[Tensor<S>], eps: S, tol: f64) -> Result<GradcheckReport>
where
    S: Scalar,
    F: Fn(&mut Tape<S>, &[Var]) -> Result<Var>,
{
    let eps64 = eps.to_f64_lossy();
    if !(1e-6..=1e-3).contains(&eps64) {
        return invalid(format!("eps {eps64:e} outside [1e-6, 1e-3]"));
    }
    let mut tape = Tape::new();
    let vars: Vec<Var> = leaves.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    if tape.value(out).len() != 1 {
        return invalid("gradcheck needs a scalar-valued function");
    }
    let base_sig = tape.branch_signature();
    let grads = tape.backward(out)?;

    let mut report = GradcheckReport {
        max_rel_error: 0.0,
        tol,
        eps: eps64,
        checked: 0,
        skipped_kinks: 0,
        worst: None,
        passed: true,
    };
    let mut probe = leaves.to_vec();
    for (li, var) in vars.iter().enumerate() {
        let analytic = grads.get_or_zeros(*var, leaves[li].len());
        for (i, &a) in analytic.iter().enumerate() {
            let orig = leaves[li].data()[i];
            probe[li].data_mut()[i] = orig + eps;
            let (fp, sp) = evaluate(&f, &probe)?;
            probe[li].data_mut()[i] = orig - eps;
            let (fm, sm) = evaluate(&f, &probe)?;
            probe[li].data_mut()[i] = orig;
            if sp != base_sig || sm != base_sig {
                report.skipped_kinks += 1;
                continue;
            }
            let numeric = ((fp - fm) / (S::lit(2.0) * eps)).to_f64_lossy();
            let analytic = a.to_f64_lossy();
            let err = relative_error(analytic, numeric);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some(WorstCoordinate {
                    leaf: li,
                    index: i,
                    analytic,
                    numeric,
                    rel_error: err,
                });
            }
        }
    }
    report.passed = report.max_rel_error <= tol && !report.max_rel_error.is_nan();
    Ok(report)
}
