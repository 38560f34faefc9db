use std::collections::BTreeMap;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use resnet_tw::baselines::{dba_barycenter, dtw_distance_banded, dtw_path, DistanceMatrix, Metric};
use resnet_tw::objectives::{pointwise_mean, Batch};
use resnet_tw::TimeSeries;

use crate::args::{Context, DataArgs};
use crate::errors::invalid;
use crate::inputs::{load_dataset, load_series};
use crate::output::{Effective, OutDir};
use crate::svg::{render, Line, Panel};

#[derive(Args, Debug)]
pub struct DtwArgs {
    /// First series of a single comparison (series spec).
    #[arg(long, requires = "y")]
    pub x: Option<String>,
    #[arg(long, requires = "x")]
    pub y: Option<String>,
    /// Without --x/--y: test-by-train distance matrix of this data.
    #[command(flatten)]
    pub data: DataArgs,
    /// Sakoe-Chiba half-width around the length-scaled diagonal.
    #[arg(long)]
    pub band: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DbaArgs {
    /// Series to average as one set (series specs); otherwise one
    /// barycenter per class of the training split.
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Serialize)]
struct PairResult {
    distance: f64,
    band: Option<usize>,
    path: Vec<(usize, usize)>,
}

/// Training samples grouped by label (unlabelled samples form class 0).
pub fn class_sets(batch: &Batch<f64>) -> anyhow::Result<BTreeMap<usize, Vec<TimeSeries<f64>>>> {
    let mut sets: BTreeMap<usize, Vec<TimeSeries<f64>>> = BTreeMap::new();
    for s in batch.samples() {
        sets.entry(s.label().unwrap_or(0))
            .or_default()
            .push(s.clone());
    }
    Ok(sets)
}

pub fn run_dtw(ctx: &Context, args: DtwArgs) -> anyhow::Result<()> {
    let band = args.band.or(ctx.file.baselines.band);
    let out = OutDir::create(&ctx.out)?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "baseline-dtw",
            seed: ctx.seed,
            settings: serde_json::json!({ "band": band, "x": args.x, "y": args.y }),
        },
    )?;
    if let (Some(x), Some(y)) = (&args.x, &args.y) {
        let (a, b) = (load_series(x)?, load_series(y)?);
        let (cost, path) = dtw_path(&a, &b, band)?;
        let result = PairResult {
            distance: cost.sqrt(),
            band,
            path,
        };
        out.write_json("dtw.json", &result)?;
        println!("{}", result.distance);
        return Ok(());
    }
    if !args.data.is_given() {
        return Err(invalid("give --x and --y, or a dataset"));
    }
    let ds = load_dataset(&args.data)?;
    let rows = ds
        .test
        .samples()
        .par_iter()
        .map(|q| {
            ds.train
                .samples()
                .iter()
                .map(|r| dtw_distance_banded(q, r, band))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = DistanceMatrix {
        metric: Metric::Dtw,
        rows: ds.test.len(),
        cols: ds.train.len(),
        values: rows.into_iter().flatten().collect(),
    };
    out.write("distances.csv", matrix.to_csv())?;
    println!("wrote {}x{} DTW distances", matrix.rows, matrix.cols);
    Ok(())
}

#[derive(Serialize)]
struct Barycenter<'a> {
    class: usize,
    name: &'a str,
    members: usize,
    objective: Vec<f64>,
    barycenter: TimeSeries<f64>,
}

pub fn run_dba(ctx: &Context, args: DbaArgs) -> anyhow::Result<()> {
    let iterations = args.iterations.unwrap_or(ctx.file.baselines.dba_iterations);
    let (sets, names): (BTreeMap<usize, Vec<TimeSeries<f64>>>, Vec<String>) =
        if !args.inputs.is_empty() {
            let members = args
                .inputs
                .iter()
                .map(|s| load_series(s))
                .collect::<anyhow::Result<Vec<_>>>()?;
            (BTreeMap::from([(0, members)]), vec!["inputs".to_string()])
        } else if args.data.is_given() {
            let ds = load_dataset(&args.data)?;
            (class_sets(&ds.train)?, ds.class_names.clone())
        } else {
            return Err(invalid("give --inputs or a dataset"));
        };

    let mut results = Vec::new();
    let mut csv = String::from("class,iteration,objective\n");
    let mut panels = Vec::new();
    for (class, members) in sets {
        let batch = Batch::new(members)?;
        let r = dba_barycenter(&batch, iterations)?;
        let objective: Vec<f64> = r.objective.clone();
        for (i, o) in objective.iter().enumerate() {
            csv += &format!("{class},{i},{o}\n");
        }
        let name = names.get(class).map_or("", String::as_str);
        let refs: Vec<&TimeSeries<f64>> = batch.samples().iter().collect();
        let mean = pointwise_mean(&refs)?;
        let panel = batch
            .samples()
            .iter()
            .fold(
                Panel::new(format!("class {class}: DBA barycenter (channel 0)")),
                |p, s| p.line(Line::on_grid("", s.row(0)).faint()),
            )
            .line(Line::on_grid("barycenter", r.barycenter.row(0)))
            .line(Line::on_grid("euclidean mean", mean.row(0)).dashed());
        panels.push(panel);
        results.push(Barycenter {
            class,
            name,
            members: batch.len(),
            objective,
            barycenter: r.barycenter,
        });
    }
    let out = OutDir::create(&ctx.out)?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "baseline-dba",
            seed: ctx.seed,
            settings: serde_json::json!({ "iterations": iterations, "inputs": args.inputs }),
        },
    )?;
    out.write_json("barycenters.json", &results)?;
    out.write("objective.csv", &csv)?;
    out.write("dba.svg", render(&panels))?;
    for r in &results {
        println!(
            "class {}: objective {:.6e} -> {:.6e}",
            r.class,
            r.objective[0],
            r.objective[r.objective.len() - 1]
        );
    }
    Ok(())
}
