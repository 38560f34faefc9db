//! The ResNet-TW transformer: embedding, residual feature blocks, projection
//! heads and the warp stream.

pub mod checkpoint;
mod config;
mod forward;
mod params;

pub use config::ModelConfig;
pub use forward::{
    forward, forward_graph, forward_with_signal, kinetic_energy, kinetic_energy_graph, read_trace,
    ForwardTrace, GraphOutputs,
};
pub use params::{ConvLayer, ModelParams, ParamVars, ResidualBlock};
