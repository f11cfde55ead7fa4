use rayon::prelude::*;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{CubeRef, DyadicCube, Grid, WhitneyCover, BUMP_DILATION};
use crate::scalar::Real;

/// `(cube index, φ_Q(x))` pairs at one point.
pub type Weights<T> = SmallVec<[(u32, T); 8]>;

/// `∏_a ψ((x_a − c_a)/((9/8)r_Q))` with `ψ(s) = exp(−1/(1 − s²))`, zero
/// outside `(9/8)Q`.
pub fn bump<T: Real>(q: &DyadicCube, x: &[T]) -> T {
    let c = q.center::<T>();
    let rad = q.side::<T>() * T::lit(BUMP_DILATION / 2.0);
    let mut v = T::one();
    for (a, &xa) in x.iter().enumerate() {
        let s = (xa - c[a]) / rad;
        let t = T::one() - s * s;
        if t <= T::zero() {
            return T::zero();
        }
        v *= (-t.recip()).exp();
    }
    v
}

/// Bumps of the Whitney cubes normalized to sum to one at every grid point
/// off `S` that some bump reaches.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity<T> {
    pub grid: Grid<T>,
    /// Normalized weights per grid point; empty where no bump reaches.
    pub weights: Vec<Weights<T>>,
    /// Bump sum before normalization.
    pub raw_sum: Vec<T>,
    /// Grid points inside residual cubes that no bump reaches.
    pub uncovered: Vec<usize>,
}

/// Evaluates the partition at every grid point. Grid points outside the
/// cover's region are an error; points in residual cubes (too close to `S`
/// for the finest level) may end up uncovered.
pub fn build_partition<T: Real>(cover: &WhitneyCover<T>, grid: &Grid<T>) -> Result<PartitionOfUnity<T>> {
    let per_point: Vec<(Weights<T>, T, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let home = cover.locate(&x).ok_or_else(|| Error::Geometry(format!("grid point {x:?} lies outside the Whitney region")))?;
            let mut w: Weights<T> = SmallVec::new();
            for &r in cover.neighbors(home) {
                let b = bump(&cover.cubes[r as usize], &x);
                if b > T::zero() {
                    w.push((r, b));
                }
            }
            let sum: T = w.iter().map(|e| e.1).sum();
            if !(sum > T::zero()) {
                return match home {
                    CubeRef::Residual(_) => Ok((SmallVec::new(), T::zero(), true)),
                    CubeRef::Whitney(_) => Err(Error::Geometry(format!("zero bump sum at grid point {x:?}"))),
                };
            }
            for e in &mut w {
                e.1 /= sum;
            }
            Ok((w, sum, false))
        })
        .collect::<Result<_>>()?;
    let mut weights = Vec::with_capacity(per_point.len());
    let mut raw_sum = Vec::with_capacity(per_point.len());
    let mut uncovered = Vec::new();
    for (i, (w, s, gap)) in per_point.into_iter().enumerate() {
        if gap {
            uncovered.push(i);
        }
        weights.push(w);
        raw_sum.push(s);
    }
    Ok(PartitionOfUnity { grid: grid.clone(), weights, raw_sum, uncovered })
}
