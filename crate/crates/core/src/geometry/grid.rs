use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::cube::Cube;

/// Uniform cell-midpoint grid on a cube: `size` cells per axis, the point of
/// cell `i` at `origin + (i + 1/2)·step`. Linear indices run axis 0 fastest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid<T> {
    pub n: usize,
    pub size: usize,
    pub origin: Vec<T>,
    pub step: T,
}

impl<T: Real> Grid<T> {
    pub fn over(region: &Cube<T>, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Parameter("grid needs at least one cell per axis".into()));
        }
        let n = region.dim();
        if size.checked_pow(n as u32).is_none_or(|t| t > 1 << 26) {
            return Err(Error::Resource(format!("grid {size}^{n} is too large")));
        }
        Ok(Self {
            n,
            size,
            origin: (0..n).map(|a| region.lower(a)).collect(),
            step: region.side() / T::from_usize_lossy(size),
        })
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn cell_volume(&self) -> T {
        self.step.powi(self.n as i32)
    }

    pub fn region(&self) -> Cube<T> {
        let side = self.step * T::from_usize_lossy(self.size);
        Cube::from_corner(&self.origin, side).expect("positive side")
    }

    pub fn coord(&self, axis: usize, i: usize) -> T {
        self.origin[axis] + (T::from_usize_lossy(i) + T::lit(0.5)) * self.step
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        (0..self.n)
            .map(|_| {
                let i = idx % self.size;
                idx /= self.size;
                i
            })
            .collect()
    }

    pub fn linear_index(&self, mi: &[usize]) -> usize {
        mi.iter().rev().fold(0, |acc, &i| acc * self.size + i)
    }

    pub fn point(&self, idx: usize) -> Vec<T> {
        self.multi_index(idx).iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Inclusive index range along `axis` of midpoints in `[lo, hi]`, or
    /// `None` when empty.
    pub fn axis_range(&self, axis: usize, lo: T, hi: T) -> Option<(usize, usize)> {
        let h = self.step;
        let to_idx = |x: T| (x - self.origin[axis]) / h - T::lit(0.5);
        let mut a = to_idx(lo).ceil().to_i64()?.max(0);
        let mut b = to_idx(hi).floor().to_i64()?.min(self.size as i64 - 1);
        // Guard against rounding in the division.
        while a > 0 && self.coord(axis, (a - 1) as usize) >= lo {
            a -= 1;
        }
        while a <= b && self.coord(axis, a as usize) < lo {
            a += 1;
        }
        while b + 1 < self.size as i64 && self.coord(axis, (b + 1) as usize) <= hi {
            b += 1;
        }
        while b >= a && self.coord(axis, b as usize) > hi {
            b -= 1;
        }
        (a <= b).then_some((a as usize, b as usize))
    }

    /// Samples a function at every grid point.
    pub fn sample<F: FnMut(&[T]) -> T>(&self, mut f: F) -> Vec<T> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Same region with `factor` times as many cells per axis.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n: self.n,
            size: self.size * factor,
            origin: self.origin.clone(),
            step: self.step / T::from_usize_lossy(factor),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoints_and_indices() {
        let g = Grid::over(&Cube::from_corner(&[0.0, 0.0], 1.0).unwrap(), 4).unwrap();
        assert_eq!(g.point(0), vec![0.125, 0.125]);
        assert_eq!(g.point(5), vec![0.375, 0.375]);
        assert_eq!(g.linear_index(&[1, 2]), 9);
        assert_eq!(g.multi_index(9), vec![1, 2]);
        assert_eq!(g.axis_range(0, 0.2, 0.7), Some((1, 2)));
        assert_eq!(g.axis_range(0, 0.375, 0.375), Some((1, 1)));
        assert_eq!(g.axis_range(0, 0.9, 2.0), None);
    }
}
