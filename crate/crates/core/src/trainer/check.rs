//! Finite-difference check of the full model gradient on a tiny setup.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::autodiff::{gradcheck, GradcheckReport, Tape, Tensor, Var};
use crate::data::smooth_series;
use crate::error::{invalid, Result};
use crate::model::{forward_graph, kinetic_energy_graph, ModelConfig, ModelParams, ParamVars};
use crate::objectives::{
    build_sigma, data_scale, multi_class_loss_graph, pairwise_input, pairwise_loss_graph,
    SigmaPrior,
};
use crate::series::TimeSeries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelGradcheckConfig {
    pub len: usize,
    pub channels: usize,
    pub n_blocks: usize,
    pub width: usize,
    pub kernel_size: usize,
    pub n_cells: usize,
    /// Classes and samples per class of the multi-class check.
    pub classes: usize,
    pub per_class: usize,
    pub alpha: f64,
    pub lambda_var: f64,
    pub lambda_smooth: f64,
    /// Standard deviation of the random head weights. Heads start at zero,
    /// which would leave every feature weight with a zero gradient.
    pub head_std: f64,
    /// Central-difference step. Smaller steps let rounding noise dominate
    /// the small gradients of deep feature weights.
    pub eps: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ModelGradcheckConfig {
    fn default() -> Self {
        Self {
            len: 16,
            channels: 2,
            n_blocks: 2,
            width: 8,
            kernel_size: 5,
            n_cells: 4,
            classes: 2,
            per_class: 3,
            alpha: 0.1,
            lambda_var: 1.0,
            lambda_smooth: 0.5,
            head_std: 0.3,
            eps: 1e-4,
            tol: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelGradcheck {
    pub config: ModelGradcheckConfig,
    pub pairwise: GradcheckReport,
    pub multi_class: GradcheckReport,
    pub passed: bool,
}

fn perturbed_params(
    config: &ModelConfig,
    head_std: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ModelParams<f64>> {
    let mut params = ModelParams::init(config)?;
    let normal =
        Normal::new(0.0, head_std).map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    for block in &mut params.blocks {
        for v in block
            .head_weight
            .data_mut()
            .iter_mut()
            .chain(block.head_bias.data_mut())
        {
            *v = normal.sample(rng);
        }
    }
    Ok(params)
}

fn vars_of(leaves: &[Var]) -> ParamVars {
    ParamVars {
        vars: leaves.to_vec(),
    }
}

/// Compares analytic and central-difference gradients of the pairwise and
/// multi-class objectives with respect to every model parameter.
pub fn check_model_gradients(cfg: &ModelGradcheckConfig) -> Result<ModelGradcheck> {
    if cfg.classes == 0 || cfg.per_class < 2 {
        return invalid("the multi-class check needs at least one class with two samples");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let prior: SigmaPrior<f64> = build_sigma(cfg.lambda_var, cfg.lambda_smooth, cfg.n_cells)?;
    let scale = data_scale::<f64>(cfg.channels, cfg.len, true);
    let model = |input_channels| ModelConfig {
        n_blocks: cfg.n_blocks,
        kernel_size: cfg.kernel_size,
        channels: cfg.width,
        n_cells: cfg.n_cells,
        input_channels,
        seed: cfg.seed,
    };

    let f = smooth_series(cfg.channels, cfg.len, 3, 0.0, &mut rng)?;
    let g = smooth_series(cfg.channels, cfg.len, 3, 0.0, &mut rng)?;
    let pair_config = model(2 * cfg.channels);
    let pair_params = perturbed_params(&pair_config, cfg.head_std, &mut rng)?;
    let input = pairwise_input(&g, &f)?;
    let pairwise = gradcheck(
        |tape: &mut Tape<f64>, leaves: &[Var]| {
            let out = forward_graph(tape, &pair_params, &vars_of(leaves), &input, &g)?;
            Ok(
                pairwise_loss_graph(tape, &f, out.warped, &out.slopes, cfg.alpha, &prior, true)?
                    .total,
            )
        },
        &owned(&pair_params),
        cfg.eps,
        cfg.tol,
    )?;

    let mut samples: Vec<TimeSeries<f64>> = Vec::new();
    for k in 0..cfg.classes {
        for _ in 0..cfg.per_class {
            samples
                .push(smooth_series(cfg.channels, cfg.len, 3, 0.0, &mut rng)?.with_label(Some(k)));
        }
    }
    let labels: Vec<Option<usize>> = samples.iter().map(TimeSeries::label).collect();
    let joint_config = model(cfg.channels);
    let joint_params = perturbed_params(&joint_config, cfg.head_std, &mut rng)?;
    let n = samples.len() as f64;
    let multi_class = gradcheck(
        |tape: &mut Tape<f64>, leaves: &[Var]| {
            let vars = vars_of(leaves);
            let mut warped = Vec::new();
            let mut reg = None;
            for s in &samples {
                let out = forward_graph(tape, &joint_params, &vars, s, s)?;
                warped.push(out.warped);
                let ke = kinetic_energy_graph(tape, &out.slopes, &prior.precision)?;
                reg = Some(match reg {
                    None => ke,
                    Some(acc) => tape.add(acc, ke)?,
                });
            }
            let data = multi_class_loss_graph(tape, &warped, &labels)?;
            let data = tape.scale(data, scale);
            let reg = tape.scale(reg.expect("non-empty"), cfg.alpha / n);
            tape.add(data, reg)
        },
        &owned(&joint_params),
        cfg.eps,
        cfg.tol,
    )?;

    let passed = pairwise.passed && multi_class.passed;
    Ok(ModelGradcheck {
        config: cfg.clone(),
        pairwise,
        multi_class,
        passed,
    })
}

fn owned(params: &ModelParams<f64>) -> Vec<Tensor<f64>> {
    params.tensors().into_iter().cloned().collect()
}
