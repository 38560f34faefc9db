use super::config::TrainConfig;
use super::engine::{flatten_grads, run, Terms};
use super::report::TrainReport;
use crate::autodiff::Tape;
use crate::error::{invalid, Result};
use crate::model::{forward_graph, forward_with_signal, read_trace, ModelConfig, ModelParams};
use crate::objectives::{build_sigma, pairwise_input, pairwise_loss_graph, SigmaPrior};
use crate::scalar::Scalar;
use crate::series::TimeSeries;
use crate::warp::WarpFunction;

/// Result of aligning one query to one reference.
#[derive(Clone, Debug)]
pub struct PairwiseFit<S> {
    pub params: ModelParams<S>,
    /// Warp with `g ∘ γ ≈ f`.
    pub warp: WarpFunction<S>,
    /// Warp after each block.
    pub intermediate: Vec<WarpFunction<S>>,
    pub warped: TimeSeries<S>,
    pub report: TrainReport,
}

struct Problem<'a, S> {
    f: &'a TimeSeries<S>,
    g: &'a TimeSeries<S>,
    input: TimeSeries<S>,
    prior: SigmaPrior<S>,
    alpha: S,
    normalize: bool,
}

impl<S: Scalar> Problem<'_, S> {
    fn evaluate(
        &self,
        params: &ModelParams<S>,
        want_grad: bool,
    ) -> Result<(Terms<S>, Option<Vec<S>>)> {
        let mut tape = Tape::new();
        let vars = params.register(&mut tape, want_grad);
        let out = forward_graph(&mut tape, params, &vars, &self.input, self.g)?;
        let loss = pairwise_loss_graph(
            &mut tape,
            self.f,
            out.warped,
            &out.slopes,
            self.alpha,
            &self.prior,
            self.normalize,
        )?;
        // Validates every intermediate warp.
        read_trace(&tape, &out, self.g)?;
        let terms = Terms {
            data: tape.value(loss.data).item(),
            reg: tape.value(loss.reg).item(),
            total: tape.value(loss.total).item(),
        };
        let grads = if want_grad {
            let g = tape.backward(loss.total)?;
            Some(flatten_grads(&g, &tape, &vars.vars))
        } else {
            None
        };
        Ok((terms, grads))
    }
}

/// Fits a fresh transformer so that `g ∘ γ` matches `f`.
///
/// The network sees the query `g` and the reference `f` stacked along the
/// channel axis, so `model_config.input_channels` is set to twice the series'
/// channel count. The returned parameters are the best seen by total loss,
/// hence the final total never exceeds the initial one.
pub fn fit_pairwise<S: Scalar>(
    f: &TimeSeries<S>,
    g: &TimeSeries<S>,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<PairwiseFit<S>> {
    train_config.validate()?;
    if f.channels() != g.channels() || f.len() != g.len() {
        return invalid(format!(
            "reference is {}x{} but query is {}x{}",
            f.channels(),
            f.len(),
            g.channels(),
            g.len()
        ));
    }
    let model_config = ModelConfig {
        input_channels: 2 * f.channels(),
        ..model_config.clone()
    };
    let params = ModelParams::init(&model_config)?;
    let problem = Problem {
        f,
        g,
        input: pairwise_input(g, f)?,
        prior: build_sigma(
            S::lit(train_config.lambda_var),
            S::lit(train_config.lambda_smooth),
            model_config.n_cells,
        )?,
        alpha: S::lit(train_config.alpha),
        normalize: train_config.normalize,
    };
    let (params, report) = run(
        train_config,
        params,
        |params, opt, _| {
            let (terms, grads) = problem.evaluate(params, true)?;
            opt.step(params, &grads.expect("requested"));
            Ok(terms)
        },
        |params| problem.evaluate(params, false).map(|(t, _)| t),
    )?;
    let trace = forward_with_signal(&params, &problem.input, g)?;
    Ok(PairwiseFit {
        params,
        warp: trace.warp,
        intermediate: trace.intermediate,
        warped: trace.warped,
        report,
    })
}
