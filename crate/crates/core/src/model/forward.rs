use super::params::{ModelParams, ParamVars};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{invalid, Result};
use crate::linalg::quadratic_form;
use crate::objectives::Precision;
use crate::scalar::Scalar;
use crate::series::TimeSeries;
use crate::warp::{uniform_grid, Tessellation, WarpFunction, SLOPE_CLAMP};

/// Tape handles produced by one forward pass.
#[derive(Clone, Debug)]
pub struct GraphOutputs {
    /// Per block: `N_T` raw slopes, pre-activation.
    pub raw_slopes: Vec<Var>,
    /// Per block: post-activation slopes.
    pub slopes: Vec<Var>,
    /// Per block: one-element first offset.
    pub offset0: Vec<Var>,
    /// Per block: boundary-scaled warp after that block.
    pub gammas: Vec<Var>,
    /// Warped signal, `[d, T]`.
    pub warped: Var,
}

impl GraphOutputs {
    pub fn warp(&self) -> Var {
        *self.gammas.last().expect("at least one block")
    }
}

/// Values of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace<S> {
    pub raw_slopes: Vec<Vec<S>>,
    pub slopes: Vec<Vec<S>>,
    pub offset0: Vec<S>,
    /// Warp after each block (diagnostics; the last one is `warp`).
    pub intermediate: Vec<WarpFunction<S>>,
    pub warp: WarpFunction<S>,
    pub warped: TimeSeries<S>,
}

fn series_tensor<S: Scalar>(s: &TimeSeries<S>) -> Tensor<S> {
    Tensor::new(&[s.channels(), s.len()], s.data().to_vec()).expect("series shape")
}

/// Records the transformer on `tape`.
///
/// `input` feeds the feature stream; `signal` is the series being warped and
/// must have the same length. Features follow
/// `h_l = h_{l-1} + conv(relu(conv(relu(conv(h_{l-1})))))`; each block's head
/// reads the time-averaged `h_l` and emits a velocity field that moves the
/// particles of the previous warp, followed by a boundary scaling.
pub fn forward_graph<S: Scalar>(
    tape: &mut Tape<S>,
    params: &ModelParams<S>,
    vars: &ParamVars,
    input: &TimeSeries<S>,
    signal: &TimeSeries<S>,
) -> Result<GraphOutputs> {
    let config = params.config();
    if input.channels() != config.input_channels {
        return invalid(format!(
            "model expects {} input channels, got {}",
            config.input_channels,
            input.channels()
        ));
    }
    if input.len() != signal.len() {
        return invalid(format!(
            "input length {} differs from warped signal length {}",
            input.len(),
            signal.len()
        ));
    }
    let t = input.len();
    let n_cells = config.n_cells;
    let tess = Tessellation::uniform(n_cells)?;
    let clamp = S::lit(SLOPE_CLAMP);

    let x = tape.constant(series_tensor(input));
    let sig = tape.constant(series_tensor(signal));
    let (ew, eb) = vars.embed();
    let mut h = tape.conv1d(x, ew, eb)?;
    let mut gamma = tape.constant(Tensor::vector(uniform_grid(t)));

    let mut out = GraphOutputs {
        raw_slopes: Vec::new(),
        slopes: Vec::new(),
        offset0: Vec::new(),
        gammas: Vec::new(),
        warped: gamma,
    };
    for l in 0..config.n_blocks {
        let (w1, b1) = vars.conv(l, 0);
        let (w2, b2) = vars.conv(l, 1);
        let (w3, b3) = vars.conv(l, 2);
        let z = tape.conv1d(h, w1, b1)?;
        let z = tape.relu(z);
        let z = tape.conv1d(z, w2, b2)?;
        let z = tape.relu(z);
        let z = tape.conv1d(z, w3, b3)?;
        h = tape.add(h, z)?;

        let pooled = tape.mean_over_time(h)?;
        let (hw, hb) = vars.head(l);
        let head = tape.linear(pooled, hw, hb)?;
        let raw = tape.slice(head, 0, n_cells)?;
        let b0 = tape.slice(head, n_cells, 1)?;
        let clamped = tape.clamp(raw, -clamp, clamp);
        let a = tape.exp(clamped);

        let v = tape.cpa_velocity(a, b0, gamma, &tess)?;
        let moved = tape.add(gamma, v)?;
        let first = tape.slice(moved, 0, 1)?;
        let last = tape.slice(moved, t - 1, 1)?;
        let span = tape.sub(last, first)?;
        let shifted = tape.sub_scalar(moved, first)?;
        let scaled = tape.div_scalar(shifted, span)?;
        gamma = tape.strict(scaled)?;

        out.raw_slopes.push(raw);
        out.slopes.push(a);
        out.offset0.push(b0);
        out.gammas.push(gamma);
    }
    let pos = tape.scale(gamma, S::from_usize_lossy(t - 1));
    out.warped = tape.gather(sig, pos)?;
    Ok(out)
}

/// Collects the values behind `outputs`, validating every warp.
pub fn read_trace<S: Scalar>(
    tape: &Tape<S>,
    outputs: &GraphOutputs,
    signal: &TimeSeries<S>,
) -> Result<ForwardTrace<S>> {
    tape.ensure_finite()?;
    let values = |v: &Var| tape.value(*v).data().to_vec();
    let intermediate = outputs
        .gammas
        .iter()
        .map(|g| WarpFunction::from_values(values(g)))
        .collect::<Result<Vec<_>>>()?;
    let warped = TimeSeries::new(signal.channels(), signal.len(), values(&outputs.warped))?
        .with_label(signal.label());
    Ok(ForwardTrace {
        raw_slopes: outputs.raw_slopes.iter().map(values).collect(),
        slopes: outputs.slopes.iter().map(values).collect(),
        offset0: outputs
            .offset0
            .iter()
            .map(|v| tape.value(*v).item())
            .collect(),
        warp: intermediate.last().expect("at least one block").clone(),
        intermediate,
        warped,
    })
}

/// Inference forward pass: warps `signal` as predicted from `input`.
pub fn forward_with_signal<S: Scalar>(
    params: &ModelParams<S>,
    input: &TimeSeries<S>,
    signal: &TimeSeries<S>,
) -> Result<ForwardTrace<S>> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape, false);
    let outputs = forward_graph(&mut tape, params, &vars, input, signal)?;
    read_trace(&tape, &outputs, signal)
}

/// Inference forward pass warping the input itself (joint alignment mode).
pub fn forward<S: Scalar>(
    params: &ModelParams<S>,
    input: &TimeSeries<S>,
) -> Result<ForwardTrace<S>> {
    forward_with_signal(params, input, input)
}

/// `sum_l a_l^T Σ^{-1} a_l` over the blocks of a trace.
pub fn kinetic_energy<S: Scalar>(trace: &ForwardTrace<S>, precision: &Precision<S>) -> Result<S> {
    let mut total = S::zero();
    for a in &trace.slopes {
        if a.len() != precision.n() {
            return invalid(format!(
                "{} slopes for a {}-cell precision",
                a.len(),
                precision.n()
            ));
        }
        total += quadratic_form(precision.matrix(), a);
    }
    Ok(total)
}

/// Graph version of [`kinetic_energy`] over the recorded slopes.
pub fn kinetic_energy_graph<S: Scalar>(
    tape: &mut Tape<S>,
    slopes: &[Var],
    precision: &Precision<S>,
) -> Result<Var> {
    let n = precision.n();
    let p = tape.constant(Tensor::new(&[n, n], precision.matrix().to_vec())?);
    let zero = tape.constant(Tensor::zeros(&[n]));
    let mut total = None;
    for &a in slopes {
        let pa = tape.linear(a, p, zero)?;
        let prod = tape.mul(a, pa)?;
        let term = tape.sum(prod);
        total = Some(match total {
            None => term,
            Some(acc) => tape.add(acc, term)?,
        });
    }
    total.ok_or_else(|| crate::Error::InvalidArgument("no blocks".into()))
}
