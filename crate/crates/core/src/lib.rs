//! Local polynomial approximation, Besov and Triebel–Lizorkin norms, and a
//! Whitney-type extension operator with its trace, on weighted atom clouds
//! approximating Ahlfors-regular sets.
//!
//! Every numeric type is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

// Negated comparisons are deliberate: NaN must take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod approx;
pub mod dset;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod norms;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{csum, trial_rng, CompensatedSum, Real};

pub type Cube = geometry::Cube<f64>;
pub type DSet = dset::DSet<f64>;
pub type WhitneyCover = geometry::WhitneyCover<f64>;
