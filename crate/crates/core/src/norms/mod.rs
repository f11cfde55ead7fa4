//! Discretized Besov and Triebel–Lizorkin norms on atom clouds and grids,
//! the sharp maximal function, discrete Hardy inequalities, and summation
//! over near-set cube families.

mod grid;
mod hardy;
mod params;
mod porous;
mod report;
mod set;

pub use grid::{
    besov_from_grid_table, besov_norm_on_grid, grid_cube_approx, grid_local_approx, grid_scale_table, half_width, sharp_maximal, tl_from_grid_table,
    tl_norm_on_grid, GridQuadrature, GridScaleTable,
};
pub use hardy::{hardy_check, HardyDirection, HardyResult};
pub use params::NormParams;
pub use porous::{dyadic_power_integral, porous_summation_check, separated_summation_check, tower_coefficients, SummationResult};
pub use report::{lq, weighted_lp, NormReport};
pub use set::{besov_norm_on_set, set_norm_from_table, set_scale_table, subset_approx, SetScaleTable};
