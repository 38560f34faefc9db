use clap::Args;
use serde::Serialize;

use resnet_tw::model::ModelConfig;
use resnet_tw::trainer::{fit_pairwise, PairwiseFit, TrainConfig};
use resnet_tw::warp::{uniform_grid, WarpFunction};
use resnet_tw::TimeSeries;

use super::channel_panels;
use crate::args::{BlockSpec, Context, ModelArgs, TrainArgs};
use crate::inputs::{load_series, load_warp};
use crate::output::{Effective, OutDir};
use crate::svg::{render, Line, Panel};

#[derive(Args, Debug)]
pub struct AlignArgs {
    /// Reference series `f` (frames CSV, series JSON, or FILE#SELECTOR).
    #[arg(long)]
    pub reference: String,
    /// Query series `g`, warped onto the reference.
    #[arg(long)]
    pub query: String,
    /// Ground-truth warp with `g ∘ γ ≈ f` (tau,gamma CSV, warp JSON, or
    /// FILE#split:i of a long-form warps CSV).
    #[arg(long)]
    pub truth: Option<String>,
    /// Fit once per block count of `--blocks A..B`.
    #[arg(long)]
    pub sweep: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Serialize)]
struct PairReport {
    n_blocks: usize,
    data_identity: f64,
    data_final: f64,
    data_reduction: f64,
    reg_final: f64,
    total_final: f64,
    distance_identity: f64,
    distance_final: f64,
    deviation_from_identity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sup_error: Option<f64>,
    epochs_run: usize,
    best_epoch: usize,
    early_stopped: bool,
}

#[derive(Serialize)]
struct Settings<'a> {
    reference: &'a str,
    query: &'a str,
    truth: Option<&'a str>,
    blocks: Vec<usize>,
    model: &'a ModelConfig,
    train: &'a TrainConfig,
}

fn summarize(
    fit: &PairwiseFit<f64>,
    f: &TimeSeries<f64>,
    g: &TimeSeries<f64>,
    truth: Option<&WarpFunction<f64>>,
) -> anyhow::Result<PairReport> {
    let initial = fit.report.initial();
    let fin = &fit.report.final_terms;
    let sup_error = match truth {
        Some(t) => Some(fit.warp.sup_distance(&t.resample(fit.warp.len())?)?),
        None => None,
    };
    let reduction = if initial.data_term > 0.0 {
        1.0 - fin.data_term / initial.data_term
    } else {
        0.0
    };
    Ok(PairReport {
        n_blocks: fit.params.config().n_blocks,
        data_identity: initial.data_term,
        data_final: fin.data_term,
        data_reduction: reduction,
        reg_final: fin.reg_term,
        total_final: fin.total,
        distance_identity: f.euclidean_distance(g)?,
        distance_final: f.euclidean_distance(&fit.warped)?,
        deviation_from_identity: fit.warp.deviation_from_identity(),
        sup_error,
        epochs_run: fit.report.epochs.len(),
        best_epoch: fit.report.best_epoch,
        early_stopped: fit.report.early_stopped,
    })
}

fn blocks_csv(fit: &PairwiseFit<f64>) -> String {
    use std::fmt::Write as _;
    let n = fit.warp.len();
    let mut out = String::from("tau");
    for l in 1..=fit.intermediate.len() {
        let _ = write!(out, ",block_{l}");
    }
    out.push('\n');
    for (j, tau) in uniform_grid::<f64>(n).into_iter().enumerate() {
        let _ = write!(out, "{tau}");
        for w in &fit.intermediate {
            let _ = write!(out, ",{}", w.values()[j]);
        }
        out.push('\n');
    }
    out
}

fn warp_panel(fit: &PairwiseFit<f64>, truth: Option<&WarpFunction<f64>>) -> Panel {
    let mut panel = Panel::new("warp");
    let last = fit.intermediate.len();
    for (l, w) in fit
        .intermediate
        .iter()
        .enumerate()
        .take(last.saturating_sub(1))
    {
        panel = panel.line(Line::on_grid(format!("block {}", l + 1), w.values()).faint());
    }
    panel = panel.line(Line::on_grid("estimate", fit.warp.values()));
    if let Some(t) = truth {
        panel = panel.line(Line::on_grid("truth", t.values()).dashed());
    }
    panel
}

pub fn run(ctx: &Context, args: AlignArgs) -> anyhow::Result<()> {
    let f = load_series(&args.reference)?;
    let g = load_series(&args.query)?;
    f.check_same_shape(&g)?;
    let truth = args.truth.as_deref().map(load_warp).transpose()?;

    let mut model = ctx.file.model.clone();
    model.input_channels = 2 * f.channels();
    let blocks: Vec<usize> = match (args.sweep, args.model.blocks) {
        (true, Some(BlockSpec { first, last })) => (first..=last).collect(),
        (true, None) => return Err(crate::errors::invalid("--sweep needs --blocks A..B")),
        (false, _) => {
            args.model.apply(&mut model)?;
            vec![model.n_blocks]
        }
    };
    args.model.apply_except_blocks(&mut model);
    let mut train = ctx.file.train.clone();
    args.train.apply(&mut train);

    let out = OutDir::create(&ctx.out)?;
    out.write_json(
        "effective_config.json",
        &Effective {
            command: "align-pair",
            seed: ctx.seed,
            settings: Settings {
                reference: &args.reference,
                query: &args.query,
                truth: args.truth.as_deref(),
                blocks: blocks.clone(),
                model: &model,
                train: &train,
            },
        },
    )?;

    if !args.sweep {
        let fit = fit_pairwise(&f, &g, &model, &train)?;
        let report = summarize(&fit, &f, &g, truth.as_ref())?;
        out.write("warp.csv", fit.warp.to_csv())?;
        out.write("blocks.csv", blocks_csv(&fit))?;
        out.write("curve.csv", fit.report.to_csv())?;
        out.write_json("report.json", &report)?;
        let mut panels = channel_panels(
            "signals",
            &[
                ("f", &f, false),
                ("g", &g, false),
                ("g∘γ", &fit.warped, true),
            ],
        );
        panels.push(warp_panel(&fit, truth.as_ref()));
        out.write("overlay.svg", render(&panels))?;
        println!(
            "data term {:.6e} -> {:.6e} ({:.2}% reduction){}",
            report.data_identity,
            report.data_final,
            100.0 * report.data_reduction,
            report
                .sup_error
                .map(|e| format!(", sup error {e:.4}"))
                .unwrap_or_default()
        );
        return Ok(());
    }

    let mut reports = Vec::new();
    let mut csv = String::from("blocks,data_term,distance,sup_error\n");
    for &n_blocks in &blocks {
        let cfg = ModelConfig {
            n_blocks,
            ..model.clone()
        };
        let fit = fit_pairwise(&f, &g, &cfg, &train)?;
        let r = summarize(&fit, &f, &g, truth.as_ref())?;
        csv += &format!(
            "{},{},{},{}\n",
            n_blocks,
            r.data_final,
            r.distance_final,
            r.sup_error.map(|e| e.to_string()).unwrap_or_default()
        );
        log::info!("blocks {n_blocks}: distance {}", r.distance_final);
        reports.push(r);
    }
    out.write("sweep.csv", &csv)?;
    out.write_json("sweep.json", &reports)?;
    let points: Vec<(f64, f64)> = reports
        .iter()
        .map(|r| (r.n_blocks as f64, r.distance_final))
        .collect();
    let mut panel =
        Panel::new("distance after alignment vs blocks").line(Line::new("‖f - g∘γ‖", points));
    if truth.is_some() {
        let sup: Vec<(f64, f64)> = reports
            .iter()
            .map(|r| (r.n_blocks as f64, r.sup_error.unwrap_or(f64::NAN)))
            .collect();
        panel = panel.line(Line::new("sup|γ - truth|", sup).dashed());
    }
    out.write("sweep.svg", render(&[panel]))?;
    print!("{csv}");
    Ok(())
}
