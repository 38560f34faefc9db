//! Minimal reverse-mode differentiation over a closed operator set.

mod gradcheck;
mod tape;
mod tensor;

pub use gradcheck::{gradcheck, relative_error, GradcheckReport, WorstCoordinate, DENOM_FLOOR};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;

#[cfg(test)]
mod tests;
