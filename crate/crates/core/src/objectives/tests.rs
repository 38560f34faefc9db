use super::*;
use crate::autodiff::{gradcheck, Tape, Tensor};
use crate::model::{forward, forward_graph, ModelConfig, ModelParams};
use crate::series::TimeSeries;

fn uni(v: &[f64]) -> TimeSeries<f64> {
    TimeSeries::univariate(v.to_vec()).unwrap()
}

fn labeled(v: &[f64], k: usize) -> TimeSeries<f64> {
    uni(v).with_label(Some(k))
}

fn small_model(d: usize, cells: usize) -> ModelParams<f64> {
    ModelParams::init(&ModelConfig {
        n_blocks: 2,
        kernel_size: 3,
        channels: 3,
        n_cells: cells,
        input_channels: d,
        seed: 1,
    })
    .unwrap()
}

#[test]
fn pairwise_examples() {
    let prior = build_sigma(1.0, 0.5, 2).unwrap();
    let params = small_model(1, 2);
    let f = uni(&[0.0, 1.0, 2.0]);
    let trace = forward(&params, &f).unwrap();
    assert_eq!(
        pairwise_loss(&f, &f, &trace, 0.0, &prior, true)
            .unwrap()
            .total,
        0.0
    );

    let f = uni(&[0.0, 2.0]);
    let g = uni(&[0.0, 0.0]);
    let trace = forward(&params, &g).unwrap();
    let terms = pairwise_loss(&f, &g, &trace, 0.0, &prior, true).unwrap();
    assert_eq!(terms.data, 2.0);
    let raw = pairwise_loss(&f, &g, &trace, 0.0, &prior, false).unwrap();
    assert_eq!(raw.data, 4.0);

    let with_reg = pairwise_loss(&f, &g, &trace, 0.3, &prior, true).unwrap();
    let ke = crate::model::kinetic_energy(&trace, &prior.precision).unwrap();
    assert_eq!(with_reg.total, 2.0 + 0.3 * ke);
    assert_eq!(with_reg.reg, ke);

    assert!(pairwise_loss(&uni(&[0.0, 1.0, 2.0]), &g, &trace, 0.0, &prior, true).is_err());
}

#[test]
fn single_class_examples() {
    let a = uni(&[0.0, 2.0]);
    let b = uni(&[2.0, 0.0]);
    assert_eq!(single_class_loss(&[a.clone(), a.clone()]).unwrap(), 0.0);
    assert_eq!(single_class_loss(&[a.clone(), b.clone()]).unwrap(), 2.0);
    let scaled = [a.map_values(|v| v * 3.0), b.map_values(|v| v * 3.0)];
    assert!((single_class_loss(&scaled).unwrap() - 18.0).abs() < 1e-12);
    assert!(single_class_loss::<f64>(&[]).is_err());
}

#[test]
fn multi_class_examples() {
    let samples = [
        labeled(&[0.0, 2.0], 0),
        labeled(&[5.0, 5.0], 1),
        labeled(&[2.0, 0.0], 0),
    ];
    assert_eq!(multi_class_loss(&samples).unwrap(), 2.0);

    let one_class = [
        labeled(&[0.0, 2.0], 4),
        labeled(&[2.0, 0.0], 4),
        labeled(&[1.0, 7.0], 4),
    ];
    assert_eq!(
        multi_class_loss(&one_class).unwrap(),
        single_class_loss(&one_class).unwrap()
    );

    let identical = [
        labeled(&[1.0, 2.0], 0),
        labeled(&[3.0, 3.0], 1),
        labeled(&[1.0, 2.0], 0),
    ];
    assert_eq!(multi_class_loss(&identical).unwrap(), 0.0);

    assert!(multi_class_loss(&[uni(&[0.0, 1.0])]).is_err());
}

#[test]
fn joint_losses_ignore_order() {
    let s = [
        labeled(&[0.0, 2.0, 1.0], 0),
        labeled(&[5.0, 5.0, 1.0], 1),
        labeled(&[2.0, 0.0, 3.0], 0),
        labeled(&[1.0, 1.0, 9.0], 1),
    ];
    let r = [s[3].clone(), s[2].clone(), s[1].clone(), s[0].clone()];
    assert!((multi_class_loss(&s).unwrap() - multi_class_loss(&r).unwrap()).abs() < 1e-12);
    assert!((single_class_loss(&s).unwrap() - single_class_loss(&r).unwrap()).abs() < 1e-12);
}

#[test]
fn graph_losses_match_values() {
    let s = [
        labeled(&[0.0, 2.0, 1.0], 0),
        labeled(&[5.0, 5.0, 1.0], 1),
        labeled(&[2.0, 0.0, 3.0], 0),
    ];
    let mut tape = Tape::new();
    let vars: Vec<_> = s
        .iter()
        .map(|x| tape.param(Tensor::new(&[1, 3], x.data().to_vec()).unwrap()))
        .collect();
    let labels: Vec<_> = s.iter().map(TimeSeries::label).collect();
    let m = multi_class_loss_graph(&mut tape, &vars, &labels).unwrap();
    let single = single_class_loss_graph(&mut tape, &vars).unwrap();
    assert!((tape.value(m).item() - multi_class_loss(&s).unwrap()).abs() < 1e-12);
    assert!((tape.value(single).item() - single_class_loss(&s).unwrap()).abs() < 1e-12);
}

#[test]
fn joint_loss_gradients_flow_through_mean() {
    let leaves = vec![
        Tensor::new(&[1, 3], vec![0.0, 2.0, 1.0]).unwrap(),
        Tensor::new(&[1, 3], vec![2.0, 0.5, 3.0]).unwrap(),
        Tensor::new(&[1, 3], vec![-1.0, 0.2, 0.7]).unwrap(),
    ];
    let report = gradcheck(
        |tape, v| multi_class_loss_graph(tape, v, &[Some(0), Some(1), Some(0)]),
        &leaves,
        1e-5,
        1e-5,
    )
    .unwrap();
    assert!(report.passed, "{report:?}");
}

#[test]
fn regularizer_gradient_through_exp() {
    let prior = build_sigma(0.5, 0.5, 4).unwrap();
    let raw = Tensor::vector(vec![0.3, -0.2, 0.9, -1.1]);
    let report = gradcheck(
        |tape, v| {
            let a = tape.exp(v[0]);
            crate::model::kinetic_energy_graph(tape, &[a], &prior.precision)
        },
        &[raw],
        1e-6,
        1e-5,
    )
    .unwrap();
    assert!(report.passed, "{report:?}");
}

#[test]
fn pairwise_graph_matches_value_loss() {
    let prior = build_sigma(1.0, 0.5, 3).unwrap();
    let mut params = small_model(2, 3);
    params.blocks[0].head_bias.data_mut()[0] = 0.4;
    params.blocks[1].head_bias.data_mut()[2] = -0.3;
    let f = uni(&[0.0, 1.0, 3.0, 2.0, 0.5, 0.0]);
    let g = uni(&[0.0, 0.5, 1.0, 3.0, 2.0, 0.0]);
    let input = pairwise_input(&g, &f).unwrap();
    assert_eq!(input.channels(), 2);

    let mut tape = Tape::new();
    let vars = params.register(&mut tape, true);
    let out = forward_graph(&mut tape, &params, &vars, &input, &g).unwrap();
    let loss =
        pairwise_loss_graph(&mut tape, &f, out.warped, &out.slopes, 0.01, &prior, true).unwrap();
    let trace = crate::model::forward_with_signal(&params, &input, &g).unwrap();
    let value = pairwise_loss(&f, &g, &trace, 0.01, &prior, true).unwrap();
    assert_eq!(tape.value(loss.total).item(), value.total);
}

#[test]
fn centroids() {
    let batch = Batch::new(vec![
        labeled(&[0.0, 2.0, 4.0], 1),
        labeled(&[2.0, 0.0, 0.0], 1),
        labeled(&[7.0, 8.0, 9.0], 3),
    ])
    .unwrap();
    let raw = average_sequence(&batch, None).unwrap();
    assert_eq!(raw[&1].data(), &[1.0, 1.0, 2.0]);
    assert_eq!(raw[&3].data(), &[7.0, 8.0, 9.0]);
    let model = small_model(1, 4);
    let warped = average_sequence(&batch, Some(&model)).unwrap();
    assert_eq!(warped, raw);
}

#[test]
fn batch_validation() {
    assert!(Batch::<f64>::new(vec![]).is_err());
    assert!(Batch::new(vec![uni(&[0.0, 1.0]), uni(&[0.0, 1.0, 2.0])]).is_err());
    let b = Batch::new(vec![
        labeled(&[0.0, 1.0], 2),
        labeled(&[1.0, 1.0], 0),
        labeled(&[1.0, 3.0], 2),
    ])
    .unwrap();
    let groups = b.class_indices().unwrap();
    assert_eq!(groups.keys().copied().collect::<Vec<_>>(), vec![0, 2]);
    assert_eq!(groups[&2], vec![0, 2]);
}
