use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::ModelConfig;
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer<S> {
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualBlock<S> {
    pub convs: [ConvLayer<S>; 3],
    /// Projection head: `[N_T + 1, C]` weight and `[N_T + 1]` bias.
    pub head_weight: Tensor<S>,
    pub head_bias: Tensor<S>,
}

/// All weights of the embedding, the residual feature blocks and the heads.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<S> {
    config: ModelConfig,
    pub embed: ConvLayer<S>,
    pub blocks: Vec<ResidualBlock<S>>,
}

fn xavier<S: Scalar>(
    rng: &mut ChaCha8Rng,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
) -> Tensor<S> {
    let std = (2.0 / (fan_in + fan_out) as f64).sqrt();
    let normal = Normal::new(0.0, std).expect("finite std");
    let n = shape.iter().product();
    let data = (0..n).map(|_| S::lit(normal.sample(rng))).collect();
    Tensor::new(shape, data).expect("consistent shape")
}

fn conv<S: Scalar>(rng: &mut ChaCha8Rng, cin: usize, cout: usize, k: usize) -> ConvLayer<S> {
    ConvLayer {
        weight: xavier(rng, &[cout, cin, k], cin * k, cout * k),
        bias: Tensor::zeros(&[cout]),
    }
}

impl<S: Scalar> ModelParams<S> {
    /// Xavier-normal convolution weights, zero biases.
    ///
    /// Projection heads start at zero (weights and bias) so every block emits
    /// equal slopes for any input and the initial warp is exactly the identity.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (c, k) = (config.channels, config.kernel_size);
        let embed = conv(&mut rng, config.input_channels, c, k);
        let blocks = (0..config.n_blocks)
            .map(|_| ResidualBlock {
                convs: [
                    conv(&mut rng, c, c, k),
                    conv(&mut rng, c, c, k),
                    conv(&mut rng, c, c, k),
                ],
                head_weight: Tensor::zeros(&[config.head_outputs(), c]),
                head_bias: Tensor::zeros(&[config.head_outputs()]),
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            embed,
            blocks,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Tensor shapes in declaration order.
    pub fn shapes(config: &ModelConfig) -> Vec<Vec<usize>> {
        let (c, k, h) = (config.channels, config.kernel_size, config.head_outputs());
        let mut shapes = vec![vec![c, config.input_channels, k], vec![c]];
        for _ in 0..config.n_blocks {
            for _ in 0..3 {
                shapes.push(vec![c, c, k]);
                shapes.push(vec![c]);
            }
            shapes.push(vec![h, c]);
            shapes.push(vec![h]);
        }
        shapes
    }

    /// Every tensor in declaration order: embedding weight and bias, then per
    /// block three conv weight/bias pairs and the head weight/bias.
    pub fn tensors(&self) -> Vec<&Tensor<S>> {
        let mut out = vec![&self.embed.weight, &self.embed.bias];
        for b in &self.blocks {
            for c in &b.convs {
                out.push(&c.weight);
                out.push(&c.bias);
            }
            out.push(&b.head_weight);
            out.push(&b.head_bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<S>> {
        let mut out = vec![&mut self.embed.weight, &mut self.embed.bias];
        for b in &mut self.blocks {
            for c in &mut b.convs {
                out.push(&mut c.weight);
                out.push(&mut c.bias);
            }
            out.push(&mut b.head_weight);
            out.push(&mut b.head_bias);
        }
        out
    }

    /// Rebuilds parameters from tensors in declaration order.
    pub fn from_tensors(config: &ModelConfig, tensors: Vec<Tensor<S>>) -> Result<Self> {
        config.validate()?;
        let shapes = Self::shapes(config);
        if tensors.len() != shapes.len() {
            return invalid(format!(
                "expected {} tensors, got {}",
                shapes.len(),
                tensors.len()
            ));
        }
        for (i, (t, s)) in tensors.iter().zip(&shapes).enumerate() {
            if t.shape() != s.as_slice() {
                return invalid(format!(
                    "tensor {i} has shape {:?}, expected {s:?}",
                    t.shape()
                ));
            }
        }
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("length checked");
        let embed = ConvLayer {
            weight: next(),
            bias: next(),
        };
        let mut blocks = Vec::with_capacity(config.n_blocks);
        for _ in 0..config.n_blocks {
            let mut layer = || ConvLayer {
                weight: next(),
                bias: next(),
            };
            let convs = [layer(), layer(), layer()];
            blocks.push(ResidualBlock {
                convs,
                head_weight: next(),
                head_bias: next(),
            });
        }
        Ok(Self {
            config: config.clone(),
            embed,
            blocks,
        })
    }

    pub fn n_values(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    /// Records every tensor on `tape`, as trainable leaves or constants.
    pub fn register(&self, tape: &mut Tape<S>, trainable: bool) -> ParamVars {
        let vars = self
            .tensors()
            .into_iter()
            .map(|t| {
                if trainable {
                    tape.param(t.clone())
                } else {
                    tape.constant(t.clone())
                }
            })
            .collect();
        ParamVars { vars }
    }
}

/// Tape handles of the parameters, in declaration order.
#[derive(Clone, Debug)]
pub struct ParamVars {
    pub vars: Vec<Var>,
}

impl ParamVars {
    pub fn embed(&self) -> (Var, Var) {
        (self.vars[0], self.vars[1])
    }

    /// `(weight, bias)` of conv `i` (0..3) in block `l`.
    pub fn conv(&self, l: usize, i: usize) -> (Var, Var) {
        let base = 2 + l * 8 + i * 2;
        (self.vars[base], self.vars[base + 1])
    }

    pub fn head(&self, l: usize) -> (Var, Var) {
        let base = 2 + l * 8 + 6;
        (self.vars[base], self.vars[base + 1])
    }
}
