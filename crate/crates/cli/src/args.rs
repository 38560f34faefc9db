//! Flags shared by several subcommands, the JSON config file and their merge.
//!
//! Precedence: flags, then the config file, then library defaults. A seed
//! given by `--seed` or the file's top-level `seed` is copied into the
//! model and training sections.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context as _;
use clap::Args;
use serde::{Deserialize, Serialize};

use resnet_tw::model::ModelConfig;
use resnet_tw::trainer::{OptimizerKind, TrainConfig};

use crate::errors::invalid;

#[derive(Args, Debug)]
pub struct GlobalArgs {
    /// JSON config file with optional `seed`, `out`, `model`, `train`,
    /// `synth`, `evaluate` and `baselines` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 forces a single-threaded run.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default `out`).
    #[arg(long, short = 'o', global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub synth: SynthSection,
    pub evaluate: EvaluateSection,
    pub baselines: BaselinesSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub per_class: usize,
    pub sigma2: Option<f64>,
    pub harmonics: usize,
    pub noise: f64,
    /// Random prototypes to draw when no prototype file is given.
    pub random_prototypes: usize,
    pub length: usize,
    pub channels: usize,
    pub prototype_harmonics: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            per_class: 10,
            sigma2: None,
            harmonics: resnet_tw::data::DEFAULT_HARMONICS,
            noise: 0.0,
            random_prototypes: 3,
            length: 50,
            channels: 1,
            prototype_harmonics: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    /// Neighbour counts of the model k-NN classifiers.
    pub k: Vec<usize>,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self { k: vec![1, 3, 5] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselinesSection {
    pub dba_iterations: usize,
    /// Sakoe-Chiba half-width for DTW; none means unconstrained.
    pub band: Option<usize>,
}

impl Default for BaselinesSection {
    fn default() -> Self {
        Self {
            dba_iterations: resnet_tw::baselines::DEFAULT_DBA_ITERATIONS,
            band: None,
        }
    }
}

/// Settings every subcommand sees.
#[derive(Debug)]
pub struct Context {
    pub file: ConfigFile,
    pub seed: u64,
    pub out: PathBuf,
}

impl GlobalArgs {
    pub fn context(&self) -> anyhow::Result<Context> {
        let file = match &self.config {
            Some(path) => read_config(path)?,
            None => ConfigFile::default(),
        };
        let seed = self.seed.or(file.seed);
        let mut file = file;
        if let Some(s) = seed {
            file.model.seed = s;
            file.train.seed = s;
        }
        let out = self
            .out
            .clone()
            .or_else(|| file.out.clone())
            .unwrap_or_else(crate::default_out);
        Ok(Context {
            seed: seed.unwrap_or(0),
            file,
            out,
        })
    }
}

fn read_config(path: &Path) -> anyhow::Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// `N` or an inclusive range `A..B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub first: usize,
    pub last: usize,
}

impl FromStr for BlockSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("not a block count: {t}"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if first == 0 || last < first {
            return Err(format!("invalid block range {s}"));
        }
        Ok(Self { first, last })
    }
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// Residual blocks `L` (align-pair also takes a range `A..B` with `--sweep`).
    #[arg(long)]
    pub blocks: Option<BlockSpec>,
    /// Odd convolution kernel size.
    #[arg(long)]
    pub kernel_size: Option<usize>,
    /// Feature channels of the convolutional stream.
    #[arg(long)]
    pub width: Option<usize>,
    /// Tessellation cells of each velocity field.
    #[arg(long)]
    pub cells: Option<usize>,
}

impl ModelArgs {
    /// Applies the flags; a block range is rejected here.
    pub fn apply(&self, config: &mut ModelConfig) -> anyhow::Result<()> {
        if let Some(b) = self.blocks {
            if b.first != b.last {
                return Err(invalid("a block range needs --sweep"));
            }
            config.n_blocks = b.first;
        }
        self.apply_except_blocks(config);
        Ok(())
    }

    pub fn apply_except_blocks(&self, config: &mut ModelConfig) {
        if let Some(k) = self.kernel_size {
            config.kernel_size = k;
        }
        if let Some(c) = self.width {
            config.channels = c;
        }
        if let Some(n) = self.cells {
            config.n_cells = n;
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct TrainArgs {
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Weight of the slope regulariser.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda_var: Option<f64>,
    #[arg(long)]
    pub lambda_smooth: Option<f64>,
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<OptimizerKind>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub adam_eps: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    /// Divide data terms by `d T` (true/false).
    #[arg(long)]
    pub normalize: Option<bool>,
    /// Early-stopping window in epochs; 0 disables it.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub early_stop_tol: Option<f64>,
    /// Record per-epoch wall time (makes curves non-reproducible).
    #[arg(long)]
    pub record_timing: Option<bool>,
}

fn parse_optimizer(s: &str) -> Result<OptimizerKind, String> {
    match s {
        "adam" => Ok(OptimizerKind::Adam),
        "sgd" => Ok(OptimizerKind::Sgd),
        _ => Err(format!("unknown optimizer {s} (adam or sgd)")),
    }
}

impl TrainArgs {
    pub fn apply(&self, c: &mut TrainConfig) {
        macro_rules! set {
            ($flag:ident => $field:ident) => {
                if let Some(v) = self.$flag {
                    c.$field = v;
                }
            };
        }
        set!(lr => learning_rate);
        set!(epochs => epochs);
        set!(batch_size => batch_size);
        set!(alpha => alpha);
        set!(lambda_var => lambda_var);
        set!(lambda_smooth => lambda_smooth);
        set!(optimizer => optimizer);
        set!(beta1 => beta1);
        set!(beta2 => beta2);
        set!(adam_eps => adam_eps);
        set!(weight_decay => weight_decay);
        set!(normalize => normalize);
        set!(patience => early_stop_patience);
        set!(early_stop_tol => early_stop_tol);
        set!(record_timing => record_timing);
    }
}

/// Where a labelled dataset comes from.
#[derive(Args, Debug, Default)]
pub struct DataArgs {
    /// Dataset JSON (as written by `synth`).
    #[arg(long, conflicts_with_all = ["ucr_train", "manifest"])]
    pub dataset: Option<PathBuf>,
    /// UCR-format training file (needs `--ucr-test`).
    #[arg(long, requires = "ucr_test")]
    pub ucr_train: Option<PathBuf>,
    #[arg(long, requires = "ucr_train")]
    pub ucr_test: Option<PathBuf>,
    /// Skip per-series z-normalisation of UCR data.
    #[arg(long)]
    pub no_znorm: bool,
    /// Multivariate manifest JSON.
    #[arg(long, conflicts_with = "ucr_train")]
    pub manifest: Option<PathBuf>,
}

impl DataArgs {
    pub fn is_given(&self) -> bool {
        self.dataset.is_some() || self.ucr_train.is_some() || self.manifest.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_specs_parse() {
        assert_eq!(
            "4".parse::<BlockSpec>().unwrap(),
            BlockSpec { first: 4, last: 4 }
        );
        assert_eq!(
            "1..8".parse::<BlockSpec>().unwrap(),
            BlockSpec { first: 1, last: 8 }
        );
        assert_eq!(
            "2..=3".parse::<BlockSpec>().unwrap(),
            BlockSpec { first: 2, last: 3 }
        );
        assert!("0".parse::<BlockSpec>().is_err());
        assert!("5..2".parse::<BlockSpec>().is_err());
        assert!("x".parse::<BlockSpec>().is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let mut train = TrainConfig {
            learning_rate: 0.5,
            epochs: 7,
            ..TrainConfig::default()
        };
        TrainArgs {
            lr: Some(0.01),
            ..TrainArgs::default()
        }
        .apply(&mut train);
        assert_eq!(train.learning_rate, 0.01);
        assert_eq!(train.epochs, 7);
    }

    #[test]
    fn seed_flag_reaches_model_and_train() {
        let g = GlobalArgs {
            config: None,
            seed: Some(9),
            threads: None,
            out: None,
        };
        let ctx = g.context().unwrap();
        assert_eq!(ctx.seed, 9);
        assert_eq!(ctx.file.model.seed, 9);
        assert_eq!(ctx.file.train.seed, 9);
        assert_eq!(ctx.out, PathBuf::from("out"));
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"modle": {}}"#).is_err());
        let c: ConfigFile =
            serde_json::from_str(r#"{"train": {"epochs": 3}, "model": {"n_blocks": 2}}"#).unwrap();
        assert_eq!(c.train.epochs, 3);
        assert_eq!(c.model.n_blocks, 2);
        assert_eq!(c.model.n_cells, ModelConfig::default().n_cells);
    }
}
