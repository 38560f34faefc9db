use super::*;
use crate::error::Result;
use crate::warp::Tessellation;

fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
    Tensor::new(shape, data.to_vec()).unwrap()
}

#[test]
fn conv1d_examples() {
    let mut tape = Tape::new();
    let x = tape.constant(t(&[1, 3], &[1.0, 2.0, 3.0]));
    let zero = tape.constant(t(&[1], &[0.0]));
    let ident = tape.constant(t(&[1, 1, 3], &[0.0, 1.0, 0.0]));
    let ones = tape.constant(t(&[1, 1, 3], &[1.0, 1.0, 1.0]));
    let y = tape.conv1d(x, ident, zero).unwrap();
    assert_eq!(tape.value(y).data(), &[1.0, 2.0, 3.0]);
    let y = tape.conv1d(x, ones, zero).unwrap();
    assert_eq!(tape.value(y).data(), &[3.0, 6.0, 5.0]);
    let zk = tape.constant(Tensor::zeros(&[1, 1, 3]));
    let c = tape.constant(t(&[1], &[4.5]));
    let y = tape.conv1d(x, zk, c).unwrap();
    assert_eq!(tape.value(y).data(), &[4.5, 4.5, 4.5]);
}

#[test]
fn conv1d_shape_errors() {
    let mut tape = Tape::new();
    let x = tape.constant(Tensor::<f64>::zeros(&[2, 5]));
    let k = tape.constant(Tensor::zeros(&[1, 3, 3]));
    let b = tape.constant(Tensor::zeros(&[1]));
    assert!(tape.conv1d(x, k, b).is_err());
    let even = tape.constant(Tensor::zeros(&[1, 2, 4]));
    assert!(tape.conv1d(x, even, b).is_err());
}

#[test]
fn linear_examples() {
    let mut tape = Tape::new();
    let x = tape.constant(t(&[2], &[2.0, 3.0]));
    let w = tape.constant(t(&[1, 2], &[1.0, 1.0]));
    let b = tape.constant(t(&[1], &[1.0]));
    let y = tape.linear(x, w, b).unwrap();
    assert_eq!(tape.value(y).data(), &[6.0]);
    let eye = tape.constant(t(&[2, 2], &[1.0, 0.0, 0.0, 1.0]));
    let zb = tape.constant(Tensor::zeros(&[2]));
    let y = tape.linear(x, eye, zb).unwrap();
    assert_eq!(tape.value(y).data(), &[2.0, 3.0]);
    let zw = tape.constant(Tensor::zeros(&[2, 2]));
    let b2 = tape.constant(t(&[2], &[-1.0, 7.0]));
    let y = tape.linear(x, zw, b2).unwrap();
    assert_eq!(tape.value(y).data(), &[-1.0, 7.0]);
    assert!(tape.linear(x, w, zb).is_err());
}

#[test]
fn backward_examples() {
    let mut tape = Tape::new();
    let x = tape.param(t(&[2, 3], &[1.0, -2.0, 0.5, 4.0, 0.0, 1.0]));
    let s = tape.sum(x);
    let g = tape.backward(s).unwrap();
    assert_eq!(g.get(x).unwrap(), &[1.0; 6]);

    let mut tape = Tape::new();
    let x = tape.param(t(&[2], &[1.0, -2.0]));
    let n = tape.squared_norm(x);
    assert_eq!(tape.backward(n).unwrap().get(x).unwrap(), &[2.0, -4.0]);

    let mut tape = Tape::new();
    let x = tape.param(t(&[2], &[-1.0, 3.0]));
    let r = tape.relu(x);
    let s = tape.sum(r);
    assert_eq!(tape.backward(s).unwrap().get(x).unwrap(), &[0.0, 1.0]);
}

#[test]
fn relu_derivative_at_zero_is_zero() {
    let mut tape = Tape::new();
    let x = tape.param(t(&[1], &[0.0]));
    let r = tape.relu(x);
    let s = tape.sum(r);
    assert_eq!(tape.backward(s).unwrap().get(x).unwrap(), &[0.0]);
}

#[test]
fn disconnected_leaf_gets_no_gradient() {
    let mut tape = Tape::new();
    let x = tape.param(t(&[2], &[1.0, 2.0]));
    let y = tape.param(t(&[2], &[3.0, 4.0]));
    let s = tape.sum(x);
    let g = tape.backward(s).unwrap();
    assert!(g.get(y).is_none());
    assert_eq!(g.get_or_zeros(y, 2), vec![0.0, 0.0]);
}

#[test]
fn non_scalar_loss_rejected() {
    let mut tape = Tape::new();
    let x = tape.param(t(&[2], &[1.0, 2.0]));
    assert!(tape.backward(x).is_err());
}

#[test]
fn non_finite_values_poison_the_tape() {
    let mut tape = Tape::new();
    let x = tape.param(t(&[1], &[1000.0]));
    let y = tape.exp(x);
    let s = tape.sum(y);
    assert!(tape.ensure_finite().is_err());
    assert!(tape.backward(s).is_err());
}

#[test]
fn gradcheck_quadratic() {
    let x = t(&[3], &[0.3, -1.2, 2.0]);
    let report = gradcheck(
        |tape: &mut Tape<f64>, v: &[Var]| Ok(tape.squared_norm(v[0])),
        &[x],
        1e-4,
        1e-7,
    )
    .unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.max_rel_error < 1e-7);
}

#[test]
fn gradcheck_constant_function() {
    let x = t(&[2], &[0.3, -1.2]);
    let report = gradcheck(
        |tape: &mut Tape<f64>, _v: &[Var]| Ok(tape.constant(Tensor::scalar(3.0))),
        &[x],
        1e-4,
        0.0,
    )
    .unwrap();
    let worst = report.worst.unwrap();
    assert_eq!(worst.analytic, 0.0);
    assert_eq!(worst.numeric, 0.0);
    assert!(report.passed);
}

#[test]
fn gradcheck_rejects_bad_eps() {
    let x = t(&[1], &[1.0]);
    let f = |tape: &mut Tape<f64>, v: &[Var]| Ok(tape.squared_norm(v[0]));
    assert!(gradcheck(f, std::slice::from_ref(&x), 1e-2, 1e-5).is_err());
    assert!(gradcheck(f, &[x], 1e-8, 1e-5).is_err());
}

fn weights(seed: u64, n: usize) -> Vec<f64> {
    // small deterministic pseudo-random values away from zero
    (0..n)
        .map(|i| {
            let h = (seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(i as u64)
                .wrapping_mul(1442695040888963407))
                >> 33;
            ((h % 2000) as f64 / 1000.0 - 1.0) * 0.9 + 0.05
        })
        .collect()
}

fn check(f: impl Fn(&mut Tape<f64>, &[Var]) -> Result<Var>, leaves: &[Tensor<f64>]) {
    let report = gradcheck(f, leaves, 1e-5, 1e-5).unwrap();
    assert!(report.passed, "{report:?}");
    assert!(report.checked > 0);
}

#[test]
fn gradcheck_every_primitive() {
    let x = t(&[2, 7], &weights(1, 14));
    let k = t(&[3, 2, 5], &weights(2, 30));
    let b = t(&[3], &weights(3, 3));
    check(
        |tp, v| {
            let y = tp.conv1d(v[0], v[1], v[2])?;
            let w = tp.constant(t(&[3, 7], &weights(9, 21)));
            let y = tp.mul(y, w)?;
            Ok(tp.sum(y))
        },
        &[x.clone(), k, b],
    );
    check(
        |tp, v| {
            let y = tp.linear(v[0], v[1], v[2])?;
            Ok(tp.squared_norm(y))
        },
        &[
            t(&[4], &weights(4, 4)),
            t(&[3, 4], &weights(5, 12)),
            t(&[3], &weights(6, 3)),
        ],
    );
    check(
        |tp, v| {
            let r = tp.relu(v[0]);
            let e = tp.exp(r);
            let c = tp.clamp(e, 0.0, 2.0);
            let m = tp.mean_over_time(c)?;
            let s = tp.scale(m, 1.7);
            Ok(tp.squared_norm(s))
        },
        std::slice::from_ref(&x),
    );
    check(
        |tp, v| {
            let a = tp.slice(v[0], 2, 5)?;
            let b = tp.slice(v[0], 7, 5)?;
            let s = tp.add(a, b)?;
            let d = tp.sub(s, b)?;
            let p = tp.mul(d, b)?;
            let first = tp.slice(v[0], 0, 1)?;
            let sh = tp.sub_scalar(p, first)?;
            let den = tp.slice(v[0], 13, 1)?;
            let q = tp.div_scalar(sh, den)?;
            let m = tp.mean(q);
            let n = tp.squared_norm(q);
            tp.add(m, n)
        },
        std::slice::from_ref(&x),
    );
    // gather: fractional positions away from integers
    let signal = t(&[2, 6], &weights(7, 12));
    let pos = t(&[4], &[0.3, 1.7, 2.45, 4.9]);
    check(
        |tp, v| {
            let g = tp.gather(v[0], v[1])?;
            Ok(tp.squared_norm(g))
        },
        &[signal, pos],
    );
    let tess = Tessellation::<f64>::uniform(4).unwrap();
    check(
        move |tp, v| {
            let a = tp.exp(v[0]);
            let y = tp.cpa_velocity(a, v[1], v[2], &tess)?;
            let w = tp.constant(t(&[5], &[0.4, -1.0, 2.0, 0.3, 1.1]));
            let y = tp.mul(y, w)?;
            Ok(tp.sum(y))
        },
        &[
            t(&[4], &[0.1, -0.7, 0.4, 1.2]),
            t(&[1], &[0.2]),
            t(&[5], &[0.05, 0.3, 0.55, 0.6, 0.93]),
        ],
    );
}

#[test]
fn cpa_velocity_matches_field_evaluation() {
    use crate::warp::CpaVelocityField;
    let tess = Tessellation::<f64>::uniform(5).unwrap();
    let slopes = vec![0.5, 2.0, 1.3, 0.1, 3.0];
    let field = CpaVelocityField::new(tess.clone(), slopes.clone(), -0.3).unwrap();
    let xs: Vec<f64> = vec![-0.2, 0.0, 0.13, 0.2, 0.41, 0.79, 1.0, 1.4];
    let mut tape = Tape::new();
    let a = tape.constant(Tensor::vector(slopes));
    let b = tape.constant(Tensor::scalar(-0.3));
    let x = tape.constant(Tensor::vector(xs.clone()));
    let v = tape.cpa_velocity(a, b, x, &tess).unwrap();
    for (got, &x) in tape.value(v).data().iter().zip(&xs) {
        assert_eq!(*got, field.eval(x));
    }
}

#[test]
fn backward_is_linear() {
    let x0 = t(&[5], &weights(11, 5));
    let grad_of = |alpha: f64, beta: f64| {
        let mut tape = Tape::new();
        let x = tape.param(x0.clone());
        let e = tape.exp(x);
        let l1 = tape.sum(e);
        let l2 = tape.squared_norm(x);
        let a = tape.scale(l1, alpha);
        let b = tape.scale(l2, beta);
        let l = tape.add(a, b).unwrap();
        tape.backward(l).unwrap().get(x).unwrap().to_vec()
    };
    let g1 = grad_of(1.0, 0.0);
    let g2 = grad_of(0.0, 1.0);
    let g = grad_of(2.5, -0.75);
    for i in 0..5 {
        assert!((g[i] - (2.5 * g1[i] - 0.75 * g2[i])).abs() < 1e-12);
    }
}

#[test]
fn seeded_backward_matches_scalar_backward() {
    let x0 = t(&[2, 4], &weights(12, 8));
    let mut tape = Tape::new();
    let x = tape.param(x0);
    let y = tape.exp(x);
    let seed = weights(13, 8);
    let gs = tape.backward_seeded(&[(y, seed.clone())]).unwrap();
    let w = tape.constant(t(&[2, 4], &seed));
    let p = tape.mul(y, w).unwrap();
    let s = tape.sum(p);
    let g = tape.backward(s).unwrap();
    assert_eq!(gs.get(x).unwrap(), g.get(x).unwrap());
}
