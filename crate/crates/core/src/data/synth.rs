use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, GroundTruth};
use crate::error::{invalid, Result};
use crate::objectives::Batch;
use crate::series::TimeSeries;
use crate::warp::{enforce_strict, uniform_grid, WarpFunction};

pub const DEFAULT_HARMONICS: usize = 10;

/// Random warps from a Fourier series on the log-derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthWarpConfig {
    /// `σ²` of the log-derivative coefficients.
    pub variance: f64,
    #[serde(default = "default_harmonics")]
    pub n_harmonics: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_harmonics() -> usize {
    DEFAULT_HARMONICS
}

impl SynthWarpConfig {
    pub fn new(variance: f64, seed: u64) -> Self {
        Self {
            variance,
            n_harmonics: DEFAULT_HARMONICS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.variance > 0.0) || !self.variance.is_finite() {
            return invalid(format!("warp variance must be > 0, got {}", self.variance));
        }
        if self.n_harmonics == 0 {
            return invalid("n_harmonics must be >= 1");
        }
        Ok(())
    }
}

/// Draws one warp on an `len`-point grid from `rng`.
///
/// `w(t) = σ Σ_h (ξ_h sin(2πht) + η_h cos(2πht)) / h` with standard normal
/// coefficients; `γ` is the normalised trapezoidal integral of `exp(w)`.
pub fn synth_warp_with<R: Rng + ?Sized>(
    variance: f64,
    n_harmonics: usize,
    len: usize,
    rng: &mut R,
) -> Result<WarpFunction<f64>> {
    if len < 2 {
        return invalid(format!("warp length {len} < 2"));
    }
    let sigma = variance.sqrt();
    let xi: Vec<f64> = (0..n_harmonics)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let eta: Vec<f64> = (0..n_harmonics)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    let grid = uniform_grid::<f64>(len);
    let rate: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let w: f64 = (0..n_harmonics)
                .map(|k| {
                    let h = (k + 1) as f64;
                    sigma * (xi[k] * (2.0 * PI * h * t).sin() + eta[k] * (2.0 * PI * h * t).cos())
                        / h
                })
                .sum();
            w.exp()
        })
        .collect();
    let mut cum = vec![0.0; len];
    let step = 1.0 / (len - 1) as f64;
    for j in 1..len {
        cum[j] = cum[j - 1] + 0.5 * (rate[j - 1] + rate[j]) * step;
    }
    let total = cum[len - 1];
    let mut values: Vec<f64> = cum.iter().map(|c| c / total).collect();
    values[len - 1] = 1.0;
    enforce_strict(&mut values);
    WarpFunction::from_values(values)
}

/// One seeded random warp.
pub fn synth_warp(config: &SynthWarpConfig, len: usize) -> Result<WarpFunction<f64>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    synth_warp_with(config.variance, config.n_harmonics, len, &mut rng)
}

/// Smooth random series: per channel `c t + Σ_{k ≤ K} (z_k / k) sin(πkt + φ_k)`
/// with `c ~ N(0, trend²)`, `z_k ~ N(0, 1)` and uniform phases.
pub fn smooth_series<R: Rng + ?Sized>(
    channels: usize,
    len: usize,
    max_harmonic: usize,
    trend: f64,
    rng: &mut R,
) -> Result<TimeSeries<f64>> {
    let grid = uniform_grid::<f64>(len);
    let rows = (0..channels)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let slope = trend * z;
            let terms: Vec<(f64, f64, f64)> = (1..=max_harmonic)
                .map(|k| {
                    (
                        k as f64,
                        StandardNormal.sample(rng),
                        rng.random_range(0.0..2.0 * PI),
                    )
                })
                .collect();
            grid.iter()
                .map(|&t| {
                    slope * t
                        + terms
                            .iter()
                            .map(|&(k, z, phi)| z / k * (PI * k * t + phi).sin())
                            .sum::<f64>()
                })
                .collect()
        })
        .collect::<Vec<Vec<f64>>>();
    TimeSeries::from_rows(&rows)
}

/// A pair for warp recovery: the reference `f = s ∘ γ` and the query `g = s`,
/// so fitting `g ∘ γ̂ ≈ f` should recover `γ̂ ≈ γ`.
#[derive(Clone, Debug)]
pub struct WarpedPair {
    pub f: TimeSeries<f64>,
    pub g: TimeSeries<f64>,
    pub truth: WarpFunction<f64>,
}

pub fn warped_pair(signal: &TimeSeries<f64>, config: &SynthWarpConfig) -> Result<WarpedPair> {
    let truth = synth_warp(config, signal.len())?;
    Ok(WarpedPair {
        f: truth.apply(signal)?,
        g: signal.clone(),
        truth,
    })
}

/// Warped, noisy copies of labelled prototypes: `per_class` training and
/// `per_class` test samples per prototype, with their true warps.
pub fn make_synthetic_dataset(
    prototypes: &Batch<f64>,
    per_class: usize,
    warp: &SynthWarpConfig,
    noise_std: f64,
) -> Result<Dataset<f64>> {
    warp.validate()?;
    if per_class == 0 {
        return invalid("per_class must be >= 1");
    }
    if !(noise_std >= 0.0) {
        return invalid("noise_std must be >= 0");
    }
    let labels = prototypes
        .samples()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.label()
                .ok_or_else(|| crate::Error::InvalidArgument(format!("prototype {i} has no label")))
        })
        .collect::<Result<Vec<_>>>()?;
    let tokens: Vec<String> = labels.iter().map(ToString::to_string).collect();
    let (ids, names) = super::labels::remap_labels(&tokens);
    let noise = Normal::new(0.0, noise_std).expect("finite std");
    let mut rng = ChaCha8Rng::seed_from_u64(warp.seed);
    let len = prototypes.series_len();
    let mut draw = |split: &mut Vec<TimeSeries<f64>>, truths: &mut Vec<Vec<f64>>| -> Result<()> {
        for (proto, &id) in prototypes.samples().iter().zip(&ids) {
            for _ in 0..per_class {
                let gamma = synth_warp_with(warp.variance, warp.n_harmonics, len, &mut rng)?;
                let warped = gamma.apply(proto)?;
                let noisy = if noise_std > 0.0 {
                    let data = warped
                        .data()
                        .iter()
                        .map(|&v| v + noise.sample(&mut rng))
                        .collect();
                    TimeSeries::new(warped.channels(), warped.len(), data)?
                } else {
                    warped
                };
                split.push(noisy.with_label(Some(id)));
                truths.push(gamma.values().to_vec());
            }
        }
        Ok(())
    };
    let (mut train, mut test) = (Vec::new(), Vec::new());
    let (mut gt_train, mut gt_test) = (Vec::new(), Vec::new());
    draw(&mut train, &mut gt_train)?;
    draw(&mut test, &mut gt_test)?;
    let mut ds = Dataset::new("synthetic", Batch::new(train)?, Batch::new(test)?, names)?;
    ds.ground_truth = Some(GroundTruth {
        train: gt_train,
        test: gt_test,
    });
    Ok(ds)
}

/// Ground-truth warps in long form: `split,sample,tau,gamma`.
pub fn ground_truth_csv(truth: &GroundTruth<f64>) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("split,sample,tau,gamma\n");
    for (split, warps) in [("train", &truth.train), ("test", &truth.test)] {
        for (i, values) in warps.iter().enumerate() {
            for (tau, gamma) in uniform_grid::<f64>(values.len()).iter().zip(values) {
                writeln!(out, "{split},{i},{tau},{gamma}").expect("writing to a String");
            }
        }
    }
    out
}
