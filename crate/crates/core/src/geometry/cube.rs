use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{sup_dist, Real};

pub type Coords = SmallVec<[i64; 4]>;

/// Closed axis-parallel cube `Q(center, half_side)` in the sup metric.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cube<T> {
    pub center: Vec<T>,
    pub half_side: T,
}

impl<T: Real> Cube<T> {
    pub fn new(center: Vec<T>, half_side: T) -> Result<Self> {
        if !(half_side > T::zero()) || !half_side.is_finite() {
            return Err(Error::Geometry(format!("cube half-side must be positive, got {half_side}")));
        }
        Ok(Self { center, half_side })
    }

    /// Cube from its lower corner and side length.
    pub fn from_corner(lower: &[T], side: T) -> Result<Self> {
        let half = side / T::lit(2.0);
        Self::new(lower.iter().map(|&l| l + half).collect(), half)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn side(&self) -> T {
        self.half_side + self.half_side
    }

    /// Diameter in the sup metric, which equals the side length.
    pub fn diam(&self) -> T {
        self.side()
    }

    pub fn volume(&self) -> T {
        self.side().powi(self.dim() as i32)
    }

    pub fn lower(&self, axis: usize) -> T {
        self.center[axis] - self.half_side
    }

    pub fn upper(&self, axis: usize) -> T {
        self.center[axis] + self.half_side
    }

    /// `tQ`: same center, half-side multiplied by `t`.
    pub fn scaled(&self, t: T) -> Self {
        Self { center: self.center.clone(), half_side: self.half_side * t }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        sup_dist(&self.center, x) <= self.half_side
    }

    pub fn contains_cube(&self, other: &Cube<T>) -> bool {
        (0..self.dim()).all(|i| self.lower(i) <= other.lower(i) && other.upper(i) <= self.upper(i))
    }

    /// Closed cubes share at least one point.
    pub fn intersects(&self, other: &Cube<T>) -> bool {
        sup_dist(&self.center, &other.center) <= self.half_side + other.half_side
    }

    /// Sup-metric distance from the cube to a point (zero inside).
    pub fn dist_to_point(&self, x: &[T]) -> T {
        (sup_dist(&self.center, x) - self.half_side).max(T::zero())
    }
}

/// Closed dyadic cube `[k 2^-j, (k+1) 2^-j]^n`.
///
/// Ordering is lexicographic on `(level, coords)`, the canonical order used
/// for every tie-break in the crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub coords: Coords,
}

const MAX_SHIFT: i32 = 100;

impl DyadicCube {
    pub fn new(level: i32, coords: &[i64]) -> Self {
        Self { level, coords: coords.iter().copied().collect() }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn side<T: Real>(&self) -> T {
        T::exp2i(-self.level)
    }

    pub fn lower<T: Real>(&self, axis: usize) -> T {
        T::from_i64(self.coords[axis]).expect("coordinate") * self.side::<T>()
    }

    pub fn upper<T: Real>(&self, axis: usize) -> T {
        T::from_i64(self.coords[axis] + 1).expect("coordinate") * self.side::<T>()
    }

    pub fn center<T: Real>(&self) -> Vec<T> {
        let h = self.side::<T>() / T::lit(2.0);
        (0..self.dim()).map(|i| self.lower::<T>(i) + h).collect()
    }

    pub fn to_cube<T: Real>(&self) -> Cube<T> {
        Cube { center: self.center(), half_side: self.side::<T>() / T::lit(2.0) }
    }

    pub fn volume<T: Real>(&self) -> T {
        self.side::<T>().powi(self.dim() as i32)
    }

    /// The dyadic cube of this level containing `x`; on shared faces the
    /// lowest index is chosen.
    pub fn containing<T: Real>(level: i32, x: &[T]) -> Self {
        let scale = T::exp2i(level);
        let coords = x
            .iter()
            .map(|&xi| {
                let s = xi * scale;
                let f = s.floor();
                let k = f.to_i64().expect("coordinate overflow");
                if s == f { k - 1 } else { k }
            })
            .collect();
        Self { level, coords }
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..(1usize << n))
            .map(|mask| DyadicCube {
                level: self.level + 1,
                coords: (0..n).map(|i| 2 * self.coords[i] + ((mask >> i) & 1) as i64).collect(),
            })
            .collect()
    }

    pub fn parent(&self) -> DyadicCube {
        DyadicCube { level: self.level - 1, coords: self.coords.iter().map(|&k| k.div_euclid(2)).collect() }
    }

    /// Integer interval `[lo, hi]` of the cube along `axis`, in units of `2^-level`.
    fn interval_at(&self, axis: usize, level: i32) -> (i128, i128) {
        let shift = level - self.level;
        assert!((0..=MAX_SHIFT).contains(&shift), "level shift out of range");
        let k = self.coords[axis] as i128;
        (k << shift, (k + 1) << shift)
    }

    fn common_level(&self, other: &DyadicCube) -> i32 {
        self.level.max(other.level)
    }

    /// Open interiors intersect.
    pub fn interiors_intersect(&self, other: &DyadicCube) -> bool {
        let l = self.common_level(other);
        (0..self.dim()).all(|i| {
            let (a0, a1) = self.interval_at(i, l);
            let (b0, b1) = other.interval_at(i, l);
            a0 < b1 && b0 < a1
        })
    }

    /// Closed cubes intersect (touching counts).
    pub fn closed_intersect(&self, other: &DyadicCube) -> bool {
        let l = self.common_level(other);
        (0..self.dim()).all(|i| {
            let (a0, a1) = self.interval_at(i, l);
            let (b0, b1) = other.interval_at(i, l);
            a0 <= b1 && b0 <= a1
        })
    }

    /// `self ⊂ int(outer)`.
    pub fn inside_interior_of(&self, outer: &DyadicCube) -> bool {
        let l = self.common_level(outer);
        (0..self.dim()).all(|i| {
            let (a0, a1) = self.interval_at(i, l);
            let (b0, b1) = outer.interval_at(i, l);
            b0 < a0 && a1 < b1
        })
    }

    /// `self ⊆ outer` (closed).
    pub fn inside(&self, outer: &DyadicCube) -> bool {
        let l = self.common_level(outer);
        (0..self.dim()).all(|i| {
            let (a0, a1) = self.interval_at(i, l);
            let (b0, b1) = outer.interval_at(i, l);
            b0 <= a0 && a1 <= b1
        })
    }

    /// Closed membership of a point.
    pub fn contains_point<T: Real>(&self, x: &[T]) -> bool {
        (0..self.dim()).all(|i| self.lower::<T>(i) <= x[i] && x[i] <= self.upper::<T>(i))
    }

    /// Closed dilation `t·Q` contains `x`.
    pub fn dilation_contains<T: Real>(&self, t: T, x: &[T]) -> bool {
        let c = self.center::<T>();
        let h = self.side::<T>() / T::lit(2.0) * t;
        sup_dist(&c, x) <= h
    }
}

/// Canonical comparison helper for sorting by `(level, coords)`.
pub fn canonical_cmp(a: &DyadicCube, b: &DyadicCube) -> Ordering {
    a.cmp(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_scaling_keeps_center() {
        let q = Cube::new(vec![0.5, -1.0], 0.25).unwrap();
        let t = q.scaled(4.0);
        assert_eq!(t.center, q.center);
        assert_eq!(t.half_side, 1.0);
        assert_eq!(t.side(), 2.0);
    }

    #[test]
    fn cube_rejects_nonpositive_side() {
        assert!(Cube::new(vec![0.0], 0.0).is_err());
        assert!(Cube::<f64>::new(vec![0.0], -1.0).is_err());
    }

    #[test]
    fn membership_is_sup_metric() {
        let q = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
        assert!(q.contains(&[1.0, -1.0]));
        assert!(!q.contains(&[1.0 + 1e-12, 0.0]));
        assert_eq!(q.dist_to_point(&[3.0, 0.5]), 2.0);
    }

    #[test]
    fn equal_level_dyadic_cubes_have_disjoint_interiors() {
        let a = DyadicCube::new(3, &[1, 2]);
        let b = DyadicCube::new(3, &[2, 2]);
        assert!(!a.interiors_intersect(&b));
        assert!(a.closed_intersect(&b));
        assert!(a.interiors_intersect(&a));
    }

    #[test]
    fn nested_dyadic_relations() {
        let q = DyadicCube::new(1, &[0, 0]);
        let inner = DyadicCube::new(3, &[1, 1]);
        assert!(inner.inside(&q));
        assert!(inner.inside_interior_of(&q));
        let edge = DyadicCube::new(3, &[0, 1]);
        assert!(edge.inside(&q));
        assert!(!edge.inside_interior_of(&q));
        assert_eq!(inner.parent().parent(), q);
        assert_eq!(q.children().len(), 4);
    }

    #[test]
    fn containing_breaks_face_ties_low() {
        let c = DyadicCube::containing(2, &[0.5f64, 0.3]);
        assert_eq!(c.coords.as_slice(), &[1, 1]);
        let d = DyadicCube::containing(0, &[-0.5f64, 2.5]);
        assert_eq!(d.coords.as_slice(), &[-1, 2]);
    }
}
