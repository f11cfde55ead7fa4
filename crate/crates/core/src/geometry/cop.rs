use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::cube::{Cube, DyadicCube};
use super::porosity::find_hole;
use super::whitney::{CubeRef, WhitneyCover};

/// Finds a Whitney cube `Q ⊂ Q(x, 2^{-i})` with
/// `2^{-i-1}/5κ ≤ diam Q ≤ 2^{-i-1}`, starting from a porosity hole
/// `Q(y, 2^{-i-1}/κ)` around a point `y ∈ Q(x, 2^{-i-1})`.
pub fn cop_check<T: Real>(s: &DSet<T>, x: &[T], i: i32, cover: &WhitneyCover<T>, kappa: T) -> Result<DyadicCube> {
    let scale = T::exp2i(-i);
    if s.spacing() > T::zero() && scale < T::lit(4.0) * s.spacing() {
        return Err(Error::Resolution(format!("scale 2^-{i} is below four atom spacings")));
    }
    let r = scale / T::lit(2.0);
    let y = find_hole(s, x, r, kappa)
        .ok_or_else(|| Error::Resolution(format!("no porosity hole of size 2^-{}/κ near the point", i + 1)))?;
    let q = match cover.locate(&y) {
        Some(CubeRef::Whitney(k)) => cover.cubes[k].clone(),
        Some(CubeRef::Residual(_)) | None => {
            return Err(Error::Resolution(format!("Whitney cover does not resolve scale 2^-{}", i + 1)));
        }
    };
    let diam = q.side::<T>();
    let lower = r / (T::lit(5.0) * kappa);
    let outer = Cube::new(x.to_vec(), scale)?;
    if !(lower <= diam && diam <= r && outer.contains_cube(&q.to_cube())) {
        return Err(Error::Resolution(format!(
            "cube at level {} fails the size or containment bounds at scale 2^-{}",
            q.level,
            i + 1
        )));
    }
    Ok(q)
}
