mod args;
mod commands;
mod errors;
mod inputs;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::args::GlobalArgs;

#[derive(Parser, Debug)]
#[command(
    name = "resnet-tw",
    version,
    about = "Diffeomorphic time-series alignment with residual velocity-field networks"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled dataset of randomly warped prototypes.
    Synth(commands::synth::SynthArgs),
    /// Fit a warp aligning a query series to a reference.
    AlignPair(commands::align::AlignArgs),
    /// Train one transformer that aligns every class to its centroid.
    TrainJoint(commands::joint::JointArgs),
    /// Nearest-centroid and nearest-neighbour accuracies on a test split.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Check model gradients against central differences on a tiny setup.
    Gradcheck(commands::gradcheck::GradcheckArgs),
    /// Dynamic time warping distances.
    BaselineDtw(commands::baselines::DtwArgs),
    /// Per-class DTW barycenters.
    BaselineDba(commands::baselines::DbaArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(errors::invalid("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let ctx = cli.global.context()?;
    match cli.command {
        Command::Synth(a) => commands::synth::run(&ctx, a),
        Command::AlignPair(a) => commands::align::run(&ctx, a),
        Command::TrainJoint(a) => commands::joint::run(&ctx, a),
        Command::Evaluate(a) => commands::evaluate::run(&ctx, a),
        Command::Gradcheck(a) => commands::gradcheck::run(&ctx, a),
        Command::BaselineDtw(a) => commands::baselines::run_dtw(&ctx, a),
        Command::BaselineDba(a) => commands::baselines::run_dba(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(errors::exit_code(&err))
        }
    }
}

/// Default output directory.
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
