//! Tessellations, piecewise-affine velocity fields and the warps they generate.

mod flow;
mod tessellation;
mod velocity;
mod warp_fn;

pub use flow::{
    boundary_scale, enforce_strict, euler_step, integrate_warp, integrate_warp_path, MIN_SPAN,
};
pub use tessellation::Tessellation;
pub use velocity::{activate_slopes, solve_offsets, CpaVelocityField, SLOPE_CLAMP};
pub use warp_fn::{grid_point, uniform_grid, WarpFunction};

/// Shorthand for [`Tessellation::uniform`].
pub fn make_uniform_tessellation<S: crate::Scalar>(
    n_cells: usize,
) -> crate::Result<Tessellation<S>> {
    Tessellation::uniform(n_cells)
}
