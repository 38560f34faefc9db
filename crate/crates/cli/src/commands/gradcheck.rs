use clap::Args;

use resnet_tw::trainer::{check_model_gradients, ModelGradcheckConfig};

use crate::args::Context;
use crate::errors::NumericFailure;
use crate::output::OutDir;

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    /// Central-difference step.
    #[arg(long)]
    pub eps: Option<f64>,
}

pub fn run(ctx: &Context, args: GradcheckArgs) -> anyhow::Result<()> {
    let defaults = ModelGradcheckConfig::default();
    let config = ModelGradcheckConfig {
        tol: args.tol,
        eps: args.eps.unwrap_or(defaults.eps),
        seed: ctx.seed,
        ..defaults
    };
    let report = check_model_gradients(&config)?;
    let out = OutDir::create(&ctx.out)?;
    out.write_json("gradcheck.json", &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.passed {
        return Err(NumericFailure(format!(
            "gradient check failed: pairwise max relative error {:e}, multi-class {:e}, tolerance {:e}",
            report.pairwise.max_rel_error, report.multi_class.max_rel_error, config.tol
        ))
        .into());
    }
    Ok(())
}
