use crate::error::{Error, Result};
use crate::geometry::{AtomIndex, BoxKind, Cube};
use crate::scalar::{csum, Real};

use super::ifs::IfsSpec;

/// Weighted atom cloud standing in for a d-regular set and its natural measure.
#[derive(Clone, Debug)]
pub struct DSet<T> {
    n: usize,
    atoms: Vec<T>,
    weights: Vec<T>,
    d: f64,
    spacing: T,
    bounding: Cube<T>,
    index: AtomIndex<T>,
}

/// Builds the atom cloud of an IFS: `m^L` atoms of weight `m^{-L}`,
/// bounded by the unit cube.
pub fn build_dset<T: Real>(spec: &IfsSpec) -> Result<DSet<T>> {
    spec.validate()?;
    let n = spec.n();
    let atoms: Vec<T> = spec.generate().into_iter().map(T::lit).collect();
    let half = T::lit(0.5);
    let bounding = Cube::new(vec![half; n], half)?;
    DSet::from_atoms(n, atoms, None, spec.similarity_dimension(), Some(bounding))
}

impl<T: Real> DSet<T> {
    /// Wraps an arbitrary atom cloud (flat `n`-vectors). Weights default to
    /// uniform and are normalized to total mass 1. The default bounding cube
    /// spans the integer box around the atoms, at least one unit wide.
    pub fn from_atoms(n: usize, atoms: Vec<T>, weights: Option<Vec<T>>, d: f64, bounding: Option<Cube<T>>) -> Result<Self> {
        if n == 0 || atoms.is_empty() || !atoms.len().is_multiple_of(n) {
            return Err(Error::Parameter("atom array must hold a positive number of n-vectors".into()));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parameter("atoms must be finite".into()));
        }
        let m = atoms.len() / n;
        let mut weights = match weights {
            Some(w) if w.len() == m => w,
            Some(w) => {
                return Err(Error::Parameter(format!("{} weights for {m} atoms", w.len())));
            }
            None => vec![T::one(); m],
        };
        if weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::Parameter("weights must be positive".into()));
        }
        let total = csum(weights.iter().copied());
        for w in &mut weights {
            *w /= total;
        }
        let bounding = match bounding {
            Some(b) => b,
            None => default_bounding(n, &atoms)?,
        };
        let index = AtomIndex::build(&atoms, n);
        let spacing = (0..m)
            .filter_map(|i| index.nearest(&atoms[i * n..(i + 1) * n], Some(i)).map(|(_, d)| d))
            .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.min(d))))
            .unwrap_or(T::zero());
        Ok(Self { n, atoms, weights, d, spacing, bounding, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[T] {
        &self.atoms[i * self.n..(i + 1) * self.n]
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Dimension `d` of the measure.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Minimal sup-metric gap between distinct atoms (0 for a single atom).
    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn bounding(&self) -> &Cube<T> {
        &self.bounding
    }

    pub fn index(&self) -> &AtomIndex<T> {
        &self.index
    }

    /// Sup-metric diameter of the atom cloud.
    pub fn diam(&self) -> T {
        (0..self.n)
            .map(|a| {
                let (lo, hi) = self.extent(a);
                hi - lo
            })
            .fold(T::zero(), T::max)
    }

    /// Coordinate range of the atoms along one axis.
    pub fn extent(&self, axis: usize) -> (T, T) {
        self.atoms
            .chunks_exact(self.n)
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), a| (lo.min(a[axis]), hi.max(a[axis])))
    }

    /// Indices of atoms in the closed cube, ascending.
    pub fn atoms_in(&self, q: &Cube<T>) -> Vec<usize> {
        let (lo, hi) = cube_box(q);
        self.index.indices_in_box(&lo, &hi, BoxKind::Closed)
    }

    /// Total weight of atoms in the closed cube.
    pub fn measure_of_cube(&self, q: &Cube<T>) -> T {
        csum(self.atoms_in(q).into_iter().map(|i| self.weights[i]))
    }

    /// Total weight in the half-open box `[lo, hi)`; additive over partitions.
    pub fn measure_half_open(&self, lo: &[T], hi: &[T]) -> T {
        csum(self.index.indices_in_box(lo, hi, BoxKind::HalfOpen).into_iter().map(|i| self.weights[i]))
    }

    /// `min_a ‖x − a‖_∞`.
    pub fn dist_to_set(&self, x: &[T]) -> T {
        self.nearest(x).1
    }

    /// Nearest atom (lowest index on ties) and its distance.
    pub fn nearest(&self, x: &[T]) -> (usize, T) {
        self.index.nearest(x, None).expect("non-empty set")
    }

    /// Same set with every atom mapped by `x ↦ s·x + shift` and the bounding
    /// cube transformed alike.
    pub fn affine_image(&self, s: T, shift: &[T]) -> Result<Self> {
        let atoms = self
            .atoms
            .chunks_exact(self.n)
            .flat_map(|a| a.iter().zip(shift).map(|(&x, &t)| s * x + t).collect::<Vec<_>>())
            .collect();
        let b = &self.bounding;
        let bounding = Cube::new(b.center.iter().zip(shift).map(|(&c, &t)| s * c + t).collect(), b.half_side * s)?;
        Self::from_atoms(self.n, atoms, Some(self.weights.clone()), self.d, Some(bounding))
    }
}

pub(crate) fn cube_box<T: Real>(q: &Cube<T>) -> (Vec<T>, Vec<T>) {
    ((0..q.dim()).map(|a| q.lower(a)).collect(), (0..q.dim()).map(|a| q.upper(a)).collect())
}

fn default_bounding<T: Real>(n: usize, atoms: &[T]) -> Result<Cube<T>> {
    let mut lo = vec![T::infinity(); n];
    let mut hi = vec![T::neg_infinity(); n];
    for a in atoms.chunks_exact(n) {
        for ax in 0..n {
            lo[ax] = lo[ax].min(a[ax].floor());
            hi[ax] = hi[ax].max(a[ax].ceil());
        }
    }
    let side = (0..n).map(|ax| hi[ax] - lo[ax]).fold(T::one(), T::max);
    Cube::from_corner(&lo, side)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cantor(depth: u32) -> DSet<f64> {
        build_dset(&IfsSpec::four_corner(depth)).unwrap()
    }

    #[test]
    fn cantor_counts_and_weights() {
        let s = cantor(5);
        assert_eq!(s.len(), 1024);
        assert!(s.weights().iter().all(|&w| w == 1.0 / 1024.0));
        assert!((s.spacing() - 2.0 * 3f64.powi(-5)).abs() < 1e-14);
    }

    #[test]
    fn measure_of_first_generation_square() {
        let s = cantor(5);
        let q = Cube::from_corner(&[0.0, 0.0], 1.0 / 3.0).unwrap();
        assert!((s.measure_of_cube(&q) - 0.25).abs() < 1e-15);
        let all = Cube::new(vec![0.5, 0.5], 1.0).unwrap();
        assert!((s.measure_of_cube(&all) - 1.0).abs() < 1e-15);
        let hole = Cube::new(vec![0.5, 0.5], 0.1).unwrap();
        assert_eq!(s.measure_of_cube(&hole), 0.0);
    }

    #[test]
    fn distance_to_set() {
        let s = cantor(3);
        let a = s.atom(7).to_vec();
        assert_eq!(s.dist_to_set(&a), 0.0);
        let h = s.spacing() / 4.0;
        assert!((s.dist_to_set(&[a[0] + h, a[1]]) - h).abs() < 1e-15);
    }

    #[test]
    fn single_atom_defaults() {
        let s = DSet::from_atoms(2, vec![0.0, 0.0], None, 0.0, None).unwrap();
        assert_eq!(s.spacing(), 0.0);
        assert_eq!(s.weight(0), 1.0);
        assert_eq!(s.bounding().side(), 1.0);
    }
}
