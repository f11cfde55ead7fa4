//! Sup-metric cubes, dyadic families and the covering constructions built on them.

mod cop;
mod covers;
mod cube;
mod dump;
mod grid;
mod index;
mod porosity;
mod shells;
mod whitney;

pub use cop::cop_check;
pub use covers::{build_covers, CoverFamily, MIN_COVER_LEVEL};
pub use cube::{canonical_cmp, Coords, Cube, DyadicCube};
pub use dump::{read_cubes_jsonl, write_cubes_jsonl};
pub use grid::Grid;
pub use index::{AtomIndex, BoxKind};
pub use porosity::{
    estimate_porosity, find_hole, near_set_family, porosity_sigma, porous_selection, residue_modulus, NearSetFamily,
    PorosityEstimate, PorousSelection, SelectionAudit, MAX_KAPPA,
};
pub use shells::{build_shells, shell_modulus, shell_violations, shells_disjoint, Shell, SHELL_INNER, SHELL_OUTER};
pub use whitney::{
    default_finest_level, default_region, dilations_intersect, dist_at_least, dist_at_most, whitney_decompose, CubeRef,
    WhitneyCover, BUMP_DILATION, MAX_WHITNEY_CUBES,
};
