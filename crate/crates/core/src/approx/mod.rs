//! Polynomial spaces, local best approximation, projections and polynomial
//! inequality certifiers.

mod best;
mod certify;
mod poly;
mod projection;

pub use best::{
    best_approx, best_approx_on_grid, best_approx_on_set, best_approx_sample, grid_indices_in, ApproxResult, Sample, IRLS_EPS,
    IRLS_MAX_ITER, IRLS_TOL, RANK_TOL,
};
pub(crate) use best::Gathered;
pub use poly::{approx_dim, binomial, multi_indices, MultiIndex, PolySpace, Polynomial};
pub use projection::{build_projection, Projection, H_SUP_LATTICE};
pub use certify::{
    lebesgue_mean, markov_check, monotonicity_factor, near_best_check, remez_check, remez_line_degeneracy, reverse_holder_check,
    write_reports_jsonl, CheckOutcome, CheckReport, Exponent, QUAD_MAX, QUAD_RTOL, QUAD_START, UNDERFLOW_TOL, ZERO_TOL,
};
