use clap::Args;
use serde::Serialize;

use resnet_tw::model::{checkpoint, forward, ModelConfig};
use resnet_tw::objectives::{pointwise_mean, Batch};
use resnet_tw::trainer::{fit_joint, joint_data_term, JointMode, TrainConfig};
use resnet_tw::TimeSeries;

use crate::args::{Context, DataArgs, ModelArgs, TrainArgs};
use crate::errors::invalid;
use crate::inputs::load_dataset;
use crate::output::{Effective, OutDir};
use crate::svg::{render, Line, Panel};

#[derive(Args, Debug)]
pub struct JointArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Ignore labels and align every training sample to one centroid.
    #[arg(long)]
    pub single_class: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Serialize)]
struct Settings<'a> {
    dataset: &'a str,
    single_class: bool,
    model: &'a ModelConfig,
    train: &'a TrainConfig,
}

#[derive(Serialize)]
struct SplitVariance {
    raw: f64,
    warped: f64,
}

#[derive(Serialize)]
struct VarianceReport {
    mode: JointMode,
    train: SplitVariance,
    #[serde(skip_serializing_if = "Option::is_none")]
    test: Option<SplitVariance>,
}

#[derive(Serialize)]
struct Centroid<'a> {
    class: usize,
    name: &'a str,
    series: &'a TimeSeries<f64>,
}

fn source_name(d: &DataArgs) -> String {
    d.dataset
        .as_ref()
        .or(d.ucr_train.as_ref())
        .or(d.manifest.as_ref())
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

/// Faint members plus a bold mean, per class, before and after warping.
fn class_panels(
    name: &str,
    raw: &[&TimeSeries<f64>],
    warped: &[TimeSeries<f64>],
    centroid: &TimeSeries<f64>,
) -> anyhow::Result<Vec<Panel>> {
    let raw_mean = pointwise_mean(raw)?;
    let mut panels = Vec::new();
    for c in 0..centroid.channels() {
        let suffix = if centroid.channels() > 1 {
            format!(", channel {c}")
        } else {
            String::new()
        };
        let before = raw
            .iter()
            .fold(Panel::new(format!("{name}: before{suffix}")), |p, s| {
                p.line(Line::on_grid("", s.row(c)).faint())
            })
            .line(Line::on_grid("mean", raw_mean.row(c)));
        let after = warped
            .iter()
            .fold(Panel::new(format!("{name}: after{suffix}")), |p, s| {
                p.line(Line::on_grid("", s.row(c)).faint())
            })
            .line(Line::on_grid("centroid", centroid.row(c)));
        panels.push(before);
        panels.push(after);
    }
    Ok(panels)
}

pub fn run(ctx: &Context, args: JointArgs) -> anyhow::Result<()> {
    let ds = load_dataset(&args.data)?;
    let train_batch = if args.single_class {
        Batch::new(
            ds.train
                .samples()
                .iter()
                .map(|s| s.clone().with_label(None))
                .collect(),
        )?
    } else {
        if let Some(i) = ds.train.samples().iter().position(|s| s.label().is_none()) {
            return Err(invalid(format!(
                "training sample {i} has no label; label every sample or pass --single-class"
            )));
        }
        ds.train.clone()
    };

    let mut model = ctx.file.model.clone();
    args.model.apply(&mut model)?;
    model.input_channels = ds.channels();
    let mut train = ctx.file.train.clone();
    args.train.apply(&mut train);

    let out = OutDir::create(&ctx.out)?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "train-joint",
            seed: ctx.seed,
            settings: Settings {
                dataset: &source_name(&args.data),
                single_class: args.single_class,
                model: &model,
                train: &train,
            },
        },
    )?;

    let fit = fit_joint(&train_batch, &model, &train)?;
    checkpoint::save(&fit.params, out.path("checkpoint.bin"))?;
    out.write("curve.csv", fit.report.to_csv())?;

    let test = if fit.mode == JointMode::Multi && ds.test.is_fully_labeled() {
        let warped = ds
            .test
            .samples()
            .iter()
            .map(|s| forward(&fit.params, s).map(|t| t.warped))
            .collect::<Result<Vec<_>, _>>()?;
        Some(SplitVariance {
            raw: joint_data_term(ds.test.samples(), fit.mode)?,
            warped: joint_data_term(&warped, fit.mode)?,
        })
    } else {
        None
    };
    out.write_json(
        "variance.json",
        &VarianceReport {
            mode: fit.mode,
            train: SplitVariance {
                raw: fit.variance.raw,
                warped: fit.variance.warped,
            },
            test,
        },
    )?;

    let centroids: Vec<Centroid> = fit
        .centroids
        .iter()
        .map(|(&class, series)| Centroid {
            class,
            name: match fit.mode {
                JointMode::Multi => ds.class_names.get(class).map_or("", String::as_str),
                JointMode::Single => "all",
            },
            series,
        })
        .collect();
    out.write_json("centroids.json", &centroids)?;

    for c in &centroids {
        let members: Vec<&TimeSeries<f64>> = train_batch
            .samples()
            .iter()
            .filter(|s| s.label().unwrap_or(0) == c.class)
            .collect();
        let warped = members
            .iter()
            .map(|s| forward(&fit.params, s).map(|t| t.warped))
            .collect::<Result<Vec<_>, _>>()?;
        let label = if c.name.is_empty() {
            format!("class {}", c.class)
        } else {
            format!("class {}", c.name)
        };
        let panels = class_panels(&label, &members, &warped, c.series)?;
        let file = match fit.mode {
            JointMode::Multi => format!("class_{}.svg", c.class),
            JointMode::Single => "all.svg".to_string(),
        };
        out.write(&file, render(&panels))?;
    }
    println!(
        "{:?} alignment: within-class variance {:.6e} -> {:.6e}",
        fit.mode, fit.variance.raw, fit.variance.warped
    );
    Ok(())
}
