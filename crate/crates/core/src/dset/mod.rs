//! Discretized d-regular sets generated by iterated function systems.

mod audit;
mod ifs;
mod io;
mod set;

pub use audit::{audit_regularity, audit_regularity_on, radius_ladder, RegularityReport, RegularityWitness, REGULARITY_RATIO_LIMIT};
pub use ifs::{IfsSpec, MAX_ATOMS};
pub use io::{parse_ifs_toml, read_atoms_csv, write_atoms_csv};
pub use set::{build_dset, DSet};
