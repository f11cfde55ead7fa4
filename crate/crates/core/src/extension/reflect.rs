use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::{Cube, DyadicCube};
use crate::scalar::Real;

/// The cube `a(Q) = Q(a_Q, r_Q/2)` at the atom `a_Q` nearest to the centre
/// of a Whitney cube.
#[derive(Clone, Debug, Serialize)]
pub struct ReflectedCube<T> {
    pub whitney: DyadicCube,
    pub a_q: usize,
    pub cube: Cube<T>,
    pub mass: T,
}

/// Builds `a(Q)` and checks `a(Q) ⊂ int(10Q)`.
pub fn reflected_cube<T: Real>(s: &DSet<T>, q: &DyadicCube) -> Result<ReflectedCube<T>> {
    let qc = q.to_cube::<T>();
    let (a_q, dist) = s.nearest(&qc.center);
    let cube = Cube { center: s.atom(a_q).to_vec(), half_side: qc.half_side / T::lit(2.0) };
    if !(dist + cube.half_side < T::lit(10.0) * qc.half_side) {
        return Err(Error::Geometry(format!("a(Q) for cube {:?} at level {} leaves int(10Q)", q.coords.as_slice(), q.level)));
    }
    let mass = s.measure_of_cube(&cube);
    Ok(ReflectedCube { whitney: q.clone(), a_q, cube, mass })
}
