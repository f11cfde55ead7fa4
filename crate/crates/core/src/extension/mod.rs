//! The Whitney-type extension operator, the trace by cube averages, and
//! diagnostics comparing local approximations of the extension with those of
//! the data.

mod extend;
mod partition;
mod reflect;
mod trace;
mod transfer;

pub use extend::{extend, flags, read_binary_field, ExtensionField, ExtensionOperator, SharedProjection, DEFAULT_DELTA};
pub use partition::{build_partition, bump, PartitionOfUnity, Weights};
pub use reflect::{reflected_cube, ReflectedCube};
pub use trace::{cube_average, trace, TraceResult};
pub use transfer::{damping_check, local_transfer_check, TRANSFER_GAMMA};
