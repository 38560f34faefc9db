use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Architecture of a ResNet-TW transformer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// Residual blocks `L`, one velocity field each.
    pub n_blocks: usize,
    /// Odd convolution kernel size `K`.
    pub kernel_size: usize,
    /// Feature channels `C`.
    pub channels: usize,
    /// Tessellation cells `N_T`.
    pub n_cells: usize,
    /// Channels of the network input (`2d` in pairwise mode).
    pub input_channels: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_blocks: 4,
            kernel_size: 51,
            channels: 16,
            n_cells: 16,
            input_channels: 1,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_blocks == 0 {
            return invalid("n_blocks must be >= 1");
        }
        if self.kernel_size.is_multiple_of(2) {
            return invalid(format!("kernel_size {} must be odd", self.kernel_size));
        }
        if self.channels == 0 {
            return invalid("channels must be >= 1");
        }
        if self.n_cells == 0 {
            return invalid("n_cells must be >= 1");
        }
        if self.input_channels == 0 {
            return invalid("input_channels must be >= 1");
        }
        Ok(())
    }

    /// Raw outputs of every projection head: `N_T` slopes then the first offset.
    pub fn head_outputs(&self) -> usize {
        self.n_cells + 1
    }
}
