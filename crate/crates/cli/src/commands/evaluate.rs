use std::path::PathBuf;

use clap::Args;

use resnet_tw::baselines::{dba_barycenter, knn_classify, ncc_classify, EvalReport, Metric};
use resnet_tw::model::checkpoint;
use resnet_tw::objectives::{average_sequence, Batch};

use super::baselines::class_sets;
use crate::args::{Context, DataArgs};
use crate::errors::invalid;
use crate::inputs::load_dataset;
use crate::output::{Effective, OutDir};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Checkpoint written by train-joint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Only the Euclidean and DTW baselines; no model is loaded.
    #[arg(long)]
    pub baselines_only: bool,
    /// Neighbour counts of the model k-NN classifiers (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// DBA iterations for the DTW centroids.
    #[arg(long)]
    pub dba_iterations: Option<usize>,
}

#[derive(serde::Serialize)]
struct Settings<'a> {
    checkpoint: Option<String>,
    baselines_only: bool,
    k: &'a [usize],
    dba_iterations: usize,
}

pub fn run(ctx: &Context, args: EvaluateArgs) -> anyhow::Result<()> {
    let ds = load_dataset(&args.data)?;
    let ks = args
        .k
        .clone()
        .unwrap_or_else(|| ctx.file.evaluate.k.clone());
    let iterations = args
        .dba_iterations
        .unwrap_or(ctx.file.baselines.dba_iterations);
    let params = match (&args.checkpoint, args.baselines_only) {
        (_, true) => None,
        (Some(path), false) => Some(checkpoint::load::<f64>(path)?),
        (None, false) => {
            return Err(invalid(
                "--checkpoint is required unless --baselines-only is given",
            ))
        }
    };
    if let Some(p) = &params {
        let expected = p.config().input_channels;
        if expected != ds.channels() {
            return Err(invalid(format!(
                "checkpoint expects {expected} input channels but the dataset has {}",
                ds.channels()
            )));
        }
    }

    let mut report = EvalReport::default();
    let plain = average_sequence(&ds.train, None)?;
    report.insert(
        "euclidean_ncc",
        ncc_classify(&ds.test, &plain, None, Metric::Euclidean)?,
    );
    let mut dba = std::collections::BTreeMap::new();
    for (class, members) in class_sets(&ds.train)? {
        dba.insert(
            class,
            dba_barycenter(&Batch::new(members)?, iterations)?
                .barycenter
                .with_label(Some(class)),
        );
    }
    report.insert(
        "dtw_ncc_dba",
        ncc_classify(&ds.test, &dba, None, Metric::Dtw)?,
    );
    if let Some(p) = &params {
        let centroids = average_sequence(&ds.train, Some(p))?;
        report.insert(
            "model_ncc",
            ncc_classify(&ds.test, &centroids, Some(p), Metric::Euclidean)?,
        );
        for &k in &ks {
            if k > ds.train.len() {
                log::warn!("skipping {k}-NN: only {} training samples", ds.train.len());
                continue;
            }
            report.insert(
                format!("model_{k}nn"),
                knn_classify(&ds.test, &ds.train, k, Some(p), Metric::Euclidean)?,
            );
        }
    }

    let out = OutDir::create(&ctx.out)?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "evaluate",
            seed: ctx.seed,
            settings: Settings {
                checkpoint: args.checkpoint.as_ref().map(|p| p.display().to_string()),
                baselines_only: args.baselines_only,
                k: &ks,
                dba_iterations: iterations,
            },
        },
    )?;
    out.write("eval.json", report.to_json()? + "\n")?;
    for (name, r) in &report.methods {
        println!("{name:<14} {:.4} ({}/{})", r.accuracy, r.correct, r.total);
    }
    Ok(())
}
