use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of generated atoms.
pub const MAX_ATOMS: usize = 1 << 24;

/// Self-similar iterated function system `x ↦ ρx + t_i` with equal ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IfsSpec {
    pub ratio: f64,
    /// Translation vectors, one per map.
    pub maps: Vec<Vec<f64>>,
    pub depth: u32,
    #[serde(default)]
    pub seed: u64,
}

impl IfsSpec {
    /// Four-corner Cantor set in the unit square, ratio 1/3.
    pub fn four_corner(depth: u32) -> Self {
        let t = 2.0 / 3.0;
        Self {
            ratio: 1.0 / 3.0,
            maps: vec![vec![0.0, 0.0], vec![t, 0.0], vec![0.0, t], vec![t, t]],
            depth,
            seed: 0,
        }
    }

    /// Four corners of the unit square with an arbitrary ratio in `(0, 1/2]`.
    pub fn corners(ratio: f64, depth: u32) -> Self {
        let t = 1.0 - ratio;
        Self {
            ratio,
            maps: vec![vec![0.0, 0.0], vec![t, 0.0], vec![0.0, t], vec![t, t]],
            depth,
            seed: 0,
        }
    }

    /// Vicsek cross: the four corners and the centre of a 3x3 subdivision.
    pub fn vicsek(depth: u32) -> Self {
        let t = 2.0 / 3.0;
        let c = 1.0 / 3.0;
        Self {
            ratio: 1.0 / 3.0,
            maps: vec![vec![0.0, 0.0], vec![t, 0.0], vec![c, c], vec![0.0, t], vec![t, t]],
            depth,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.maps.first().map_or(0, Vec::len)
    }

    pub fn similarity_dimension(&self) -> f64 {
        (self.maps.len() as f64).ln() / (1.0 / self.ratio).ln()
    }

    pub fn atom_count(&self) -> Option<usize> {
        self.maps.len().checked_pow(self.depth)
    }

    /// Checks ratios, dimensions, containment in the unit cube, the
    /// open-set condition at depth 1 and `n-1 < d < n`.
    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::Parameter("IFS needs at least one map".into()));
        }
        let n = self.n();
        if n == 0 || self.maps.iter().any(|t| t.len() != n) {
            return Err(Error::Parameter("all translations must share one positive dimension".into()));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::Parameter(format!("ratio must lie in (0,1), got {}", self.ratio)));
        }
        for (i, t) in self.maps.iter().enumerate() {
            if t.iter().any(|&x| !(x >= 0.0 && x + self.ratio <= 1.0)) {
                return Err(Error::Geometry(format!("map {i} does not send the unit cube into itself")));
            }
        }
        for i in 0..self.maps.len() {
            for j in i + 1..self.maps.len() {
                let (a, b) = (&self.maps[i], &self.maps[j]);
                let overlap = (0..n).all(|ax| a[ax] < b[ax] + self.ratio && b[ax] < a[ax] + self.ratio);
                if overlap {
                    return Err(Error::OpenSetCondition { first: i, second: j });
                }
            }
        }
        let d = self.similarity_dimension();
        let (lo, hi) = ((n - 1) as f64, n as f64);
        if !(d > lo && d < hi) {
            return Err(Error::Dimension { d, lo, hi });
        }
        match self.atom_count() {
            Some(m) if m <= MAX_ATOMS => Ok(()),
            _ => Err(Error::Resource(format!(
                "{} maps at depth {} exceed the atom budget {MAX_ATOMS}",
                self.maps.len(),
                self.depth
            ))),
        }
    }

    /// Atoms at the configured depth: images of the fixed point of the first
    /// map under all depth-`L` compositions. Generation `l+1` lists the image
    /// of generation `l` under map 0, then under map 1, and so on.
    pub fn generate(&self) -> Vec<f64> {
        let n = self.n();
        let rho = self.ratio;
        let mut atoms: Vec<f64> = self.maps[0].iter().map(|&t| t / (1.0 - rho)).collect();
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(atoms.len() * self.maps.len());
            for t in &self.maps {
                for a in atoms.chunks_exact(n) {
                    next.extend(a.iter().zip(t).map(|(&x, &ti)| rho * x + ti));
                }
            }
            atoms = next;
        }
        atoms
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_corner_dimension() {
        let s = IfsSpec::four_corner(5);
        assert!((s.similarity_dimension() - 4f64.ln() / 3f64.ln()).abs() < 1e-15);
        s.validate().unwrap();
        assert_eq!(s.generate().len(), 2 * 1024);
    }

    #[test]
    fn overlapping_maps_fail_open_set_condition() {
        let s = IfsSpec { ratio: 0.6, maps: vec![vec![0.0, 0.0], vec![0.4, 0.4]], depth: 1, seed: 0 };
        assert!(matches!(s.validate(), Err(Error::OpenSetCondition { first: 0, second: 1 })));
    }

    #[test]
    fn dimension_outside_band_is_rejected() {
        // Two maps of ratio 1/3 in the plane: d ≈ 0.63 < 1.
        let s = IfsSpec { ratio: 1.0 / 3.0, maps: vec![vec![0.0, 0.0], vec![2.0 / 3.0, 2.0 / 3.0]], depth: 2, seed: 0 };
        assert!(matches!(s.validate(), Err(Error::Dimension { .. })));
    }

    #[test]
    fn depth_zero_is_fixed_point() {
        let s = IfsSpec::four_corner(0);
        assert_eq!(s.generate(), vec![0.0, 0.0]);
    }
}
