use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use resnet_tw::data::{ground_truth_csv, make_synthetic_dataset, smooth_series, SynthWarpConfig};
use resnet_tw::objectives::Batch;
use resnet_tw::TimeSeries;

use crate::args::{Context, SynthSection};
use crate::errors::invalid;
use crate::inputs::load_prototypes;
use crate::output::{Effective, OutDir};
use crate::svg::{render, Line, Panel};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// JSON list of prototype series; random smooth prototypes otherwise.
    #[arg(long)]
    pub prototypes: Option<PathBuf>,
    /// Number of random prototypes (classes) when no file is given.
    #[arg(long)]
    pub random_prototypes: Option<usize>,
    /// Length of random prototypes.
    #[arg(long)]
    pub length: Option<usize>,
    /// Channels of random prototypes.
    #[arg(long)]
    pub channels: Option<usize>,
    /// Highest harmonic of random prototypes.
    #[arg(long)]
    pub prototype_harmonics: Option<usize>,
    /// Training (and again test) samples per prototype.
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Variance of the warp log-derivative coefficients.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Harmonics of the random warps.
    #[arg(long)]
    pub harmonics: Option<usize>,
    /// Standard deviation of additive Gaussian noise.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    dataset: &'a str,
    warps: &'a str,
    prototypes: &'a str,
    classes: usize,
    train_samples: usize,
    test_samples: usize,
    length: usize,
    channels: usize,
    seed: u64,
    synth: &'a SynthSection,
}

fn merge(file: &SynthSection, a: &SynthArgs) -> SynthSection {
    let mut s = file.clone();
    if let Some(v) = a.random_prototypes {
        s.random_prototypes = v;
    }
    if let Some(v) = a.length {
        s.length = v;
    }
    if let Some(v) = a.channels {
        s.channels = v;
    }
    if let Some(v) = a.prototype_harmonics {
        s.prototype_harmonics = v;
    }
    if let Some(v) = a.per_class {
        s.per_class = v;
    }
    if a.sigma2.is_some() {
        s.sigma2 = a.sigma2;
    }
    if let Some(v) = a.harmonics {
        s.harmonics = v;
    }
    if let Some(v) = a.noise {
        s.noise = v;
    }
    s
}

fn random_prototypes(s: &SynthSection, seed: u64) -> anyhow::Result<Batch<f64>> {
    if s.random_prototypes == 0 {
        return Err(invalid("--random-prototypes must be >= 1"));
    }
    if s.channels == 0 || s.length < 2 {
        return Err(invalid(
            "random prototypes need --channels >= 1 and --length >= 2",
        ));
    }
    // a separate stream keeps prototypes independent of the warp draws
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let samples = (0..s.random_prototypes)
        .map(|k| {
            Ok(smooth_series(
                s.channels,
                s.length,
                s.prototype_harmonics.max(1),
                0.0,
                &mut rng,
            )?
            .with_label(Some(k)))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Batch::new(samples)?)
}

pub fn run(ctx: &Context, args: SynthArgs) -> anyhow::Result<()> {
    let settings = merge(&ctx.file.synth, &args);
    let sigma2 = settings
        .sigma2
        .ok_or_else(|| invalid("--sigma2 is required"))?;
    if sigma2.is_nan() || sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(invalid(format!("--sigma2 must be > 0, got {sigma2}")));
    }
    if settings.per_class == 0 {
        return Err(invalid("--per-class must be >= 1"));
    }
    let prototypes = match &args.prototypes {
        Some(path) => load_prototypes(path)?,
        None => random_prototypes(&settings, ctx.seed)?,
    };
    let warp = SynthWarpConfig {
        variance: sigma2,
        n_harmonics: settings.harmonics,
        seed: ctx.seed,
    };
    let ds = make_synthetic_dataset(&prototypes, settings.per_class, &warp, settings.noise)?;
    let truth = ds
        .ground_truth
        .as_ref()
        .expect("synthetic data carries its warps");

    let out = OutDir::create(&ctx.out)?;
    out.write("dataset.json", ds.to_json()?)?;
    out.write("warps.csv", ground_truth_csv(truth))?;
    out.write_json("prototypes.json", prototypes.samples())?;
    out.write_json(
        "manifest.json",
        &Manifest {
            dataset: "dataset.json",
            warps: "warps.csv",
            prototypes: "prototypes.json",
            classes: ds.n_classes(),
            train_samples: ds.train.len(),
            test_samples: ds.test.len(),
            length: ds.length(),
            channels: ds.channels(),
            seed: ctx.seed,
            synth: &settings,
        },
    )?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "synth",
            seed: ctx.seed,
            settings: &settings,
        },
    )?;
    let warps = truth
        .train
        .iter()
        .enumerate()
        .fold(Panel::new("training warps"), |p, (i, w)| {
            p.line(Line::on_grid(format!("warp {i}"), w).faint())
        })
        .line(Line::on_grid("identity", &[0.0, 1.0]).dashed());
    let protos: Vec<&TimeSeries<f64>> = prototypes.samples().iter().collect();
    let proto_panel = protos
        .iter()
        .enumerate()
        .fold(Panel::new("prototypes (channel 0)"), |p, (i, s)| {
            p.line(Line::on_grid(format!("class {i}"), s.row(0)))
        });
    out.write("synth.svg", render(&[proto_panel, warps]))?;
    println!(
        "wrote {} train and {} test samples of {} classes to {}",
        ds.train.len(),
        ds.test.len(),
        ds.n_classes(),
        ctx.out.display()
    );
    Ok(())
}
