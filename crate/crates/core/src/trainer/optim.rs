use crate::scalar::Scalar;

/// `p -= lr * (g + weight_decay * p)` with the decay decoupled from the gradient.
pub fn sgd_step<S: Scalar>(params: &mut [S], grads: &[S], lr: S, weight_decay: S) {
    assert_eq!(
        params.len(),
        grads.len(),
        "parameter/gradient length mismatch"
    );
    for (p, &g) in params.iter_mut().zip(grads) {
        if weight_decay > S::zero() {
            *p -= lr * weight_decay * *p;
        }
        *p -= lr * g;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig<S> {
    pub lr: S,
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
    pub weight_decay: S,
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<S> {
    pub m: Vec<S>,
    pub v: Vec<S>,
    pub t: u64,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![S::zero(); n],
            v: vec![S::zero(); n],
            t: 0,
        }
    }
}

/// Bias-corrected Adam with decoupled weight decay.
pub fn adam_step<S: Scalar>(
    params: &mut [S],
    grads: &[S],
    state: &mut AdamState<S>,
    cfg: &AdamConfig<S>,
) {
    assert_eq!(
        params.len(),
        grads.len(),
        "parameter/gradient length mismatch"
    );
    assert_eq!(
        params.len(),
        state.m.len(),
        "optimizer state length mismatch"
    );
    state.t += 1;
    let t = state.t as i32;
    let c1 = S::one() - cfg.beta1.powi(t);
    let c2 = S::one() - cfg.beta2.powi(t);
    for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
        let m = cfg.beta1 * state.m[i] + (S::one() - cfg.beta1) * g;
        let v = cfg.beta2 * state.v[i] + (S::one() - cfg.beta2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        if cfg.weight_decay > S::zero() {
            *p -= cfg.lr * cfg.weight_decay * *p;
        }
        *p -= cfg.lr * (m / c1) / ((v / c2).sqrt() + cfg.eps);
    }
}
