use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::scalar::{csum, Real};

use super::best::Gathered;
use super::poly::{PolySpace, Polynomial};
use super::RANK_TOL;

/// Lattice resolution per axis for the sup-norm estimate of `h_ν`.
pub const H_SUP_LATTICE: usize = 33;

/// Orthogonal projection onto `𝒫_k` in `L²(μ|Q)` and its representation
/// `P f = Σ_ν avg(f·h_ν) m_ν` in the anchored monomials `m_ν`.
#[derive(Clone, Debug, Serialize)]
pub struct Projection<T> {
    pub cube: Cube<T>,
    pub k: usize,
    pub space: PolySpace<T>,
    /// Orthonormal basis, row `β` holds the coefficients of `P_β`.
    pub onb: Vec<Vec<T>>,
    /// Row `ν` holds the coefficients of `h_ν`.
    pub repr: Vec<Vec<T>>,
    pub h_sup: Vec<T>,
    pub gram_error: T,
    pub mass: T,
    #[serde(skip)]
    points: Vec<T>,
    #[serde(skip)]
    weights: Vec<T>,
}

impl<T: Real> Projection<T> {
    /// Builds the projection for the measure `Σ w_i δ_{x_i}`; the basis is
    /// anchored at `cube`.
    pub fn from_points(n: usize, points: &[T], weights: &[T], cube: &Cube<T>, k: usize) -> Result<Self> {
        let m = weights.len();
        if m == 0 {
            return Err(Error::EmptySupport);
        }
        let space = PolySpace::new(k as i32, cube.center.clone(), cube.side());
        let dim = space.dim();
        let mut vals = vec![T::zero(); m * dim];
        for i in 0..m {
            space.eval_basis(&points[i * n..(i + 1) * n], &mut vals[i * dim..(i + 1) * dim]);
        }
        let inner = |a: &[T], b: &[T]| csum((0..m).map(|i| weights[i] * a[i] * b[i]));
        let mut onb: Vec<Vec<T>> = Vec::with_capacity(dim);
        let mut onb_vals: Vec<Vec<T>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let mut v: Vec<T> = (0..m).map(|i| vals[i * dim + j]).collect();
            let mut c = vec![T::zero(); dim];
            c[j] = T::one();
            let norm0 = inner(&v, &v).sqrt();
            for _ in 0..2 {
                for (q, qc) in onb_vals.iter().zip(&onb) {
                    let d = inner(q, &v);
                    for (vi, &qi) in v.iter_mut().zip(q) {
                        *vi -= d * qi;
                    }
                    for (ci, &qci) in c.iter_mut().zip(qc) {
                        *ci -= d * qci;
                    }
                }
            }
            let nv = inner(&v, &v).sqrt();
            if !(norm0 > T::zero()) || nv <= T::lit(RANK_TOL) * norm0 {
                return Err(Error::DegenerateGeometry { rank: onb.len(), dim });
            }
            v.iter_mut().for_each(|x| *x /= nv);
            c.iter_mut().for_each(|x| *x /= nv);
            onb_vals.push(v);
            onb.push(c);
        }
        let mut gram_error = T::zero();
        for a in 0..dim {
            for b in 0..=a {
                let g = inner(&onb_vals[a], &onb_vals[b]);
                let target = if a == b { T::one() } else { T::zero() };
                gram_error = gram_error.max((g - target).abs());
            }
        }
        let mass = csum(weights.iter().copied());
        let repr: Vec<Vec<T>> = (0..dim)
            .map(|nu| (0..dim).map(|j| mass * csum(onb.iter().map(|row| row[nu] * row[j]))).collect())
            .collect();
        let h_sup = repr.iter().map(|h| lattice_sup(&space, h, cube)).collect();
        Ok(Self { cube: cube.clone(), k, space, onb, repr, h_sup, gram_error, mass, points: points.to_vec(), weights: weights.to_vec() })
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    fn pairing(&self, values: &[T], coeffs: &[T]) -> T {
        let n = self.space.n;
        csum((0..self.weights.len()).map(|i| self.weights[i] * values[i] * self.space.eval(coeffs, &self.points[i * n..(i + 1) * n])))
    }

    /// `Σ_β ⟨f, P_β⟩ P_β`, with `values` aligned to the support points.
    pub fn apply(&self, values: &[T]) -> Polynomial<T> {
        let dim = self.space.dim();
        let mut coeffs = vec![T::zero(); dim];
        for row in &self.onb {
            let c = self.pairing(values, row);
            for (o, &r) in coeffs.iter_mut().zip(row) {
                *o += c * r;
            }
        }
        Polynomial { space: self.space.clone(), coeffs }
    }

    /// Same projection through the representation `Σ_ν avg(f·h_ν) m_ν`.
    pub fn apply_repr(&self, values: &[T]) -> Polynomial<T> {
        let coeffs = self.repr.iter().map(|h| self.pairing(values, h) / self.mass).collect();
        Polynomial { space: self.space.clone(), coeffs }
    }

    /// Normalized `L^u` norm of `f − P f` over the support.
    pub fn residual_norm(&self, values: &[T], u: u32) -> T {
        let p = self.apply(values);
        let n = self.space.n;
        let uu = T::from_u32(u).unwrap();
        let s = csum((0..self.weights.len()).map(|i| self.weights[i] * (values[i] - p.eval(&self.points[i * n..(i + 1) * n])).abs().powf(uu)));
        (s / self.mass).powf(uu.recip())
    }
}

fn lattice_sup<T: Real>(space: &PolySpace<T>, coeffs: &[T], cube: &Cube<T>) -> T {
    let n = space.n;
    let steps = H_SUP_LATTICE - 1;
    let mut idx = vec![0usize; n];
    let mut x = vec![T::zero(); n];
    let mut best = T::zero();
    loop {
        for a in 0..n {
            x[a] = cube.lower(a) + cube.side() * T::from_usize_lossy(idx[a]) / T::from_usize_lossy(steps);
        }
        best = best.max(space.eval(coeffs, &x).abs());
        let mut a = 0;
        loop {
            if a == n {
                return best;
            }
            idx[a] += 1;
            if idx[a] <= steps {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `P_{k,Q}` for the atoms of `S` in the closed cube `Q`.
pub fn build_projection<T: Real>(s: &DSet<T>, q: &Cube<T>, k: usize) -> Result<(Projection<T>, Vec<usize>)> {
    let idx = s.atoms_in(q);
    let g = Gathered::from_indices(s.n(), s.atoms(), s.weights(), s.weights(), &idx);
    Ok((Projection::from_points(s.n(), &g.points, &g.weights, q, k)?, idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud() -> (Vec<f64>, Vec<f64>) {
        let mut p = Vec::new();
        for i in 0..7 {
            for j in 0..5 {
                p.push(i as f64 / 6.0 + 0.01 * j as f64);
                p.push(j as f64 / 4.0);
            }
        }
        let w = (0..35).map(|i| 1.0 + (i % 3) as f64).collect();
        (p, w)
    }

    #[test]
    fn reproduces_polynomials_and_matches_repr() {
        let (p, w) = cloud();
        let q = Cube::new(vec![0.5, 0.5], 0.5).unwrap();
        let pr = Projection::from_points(2, &p, &w, &q, 2).unwrap();
        assert!(pr.gram_error < 1e-10);
        let f: Vec<f64> = p.chunks(2).map(|x| 1.0 + x[0] - 2.0 * x[0] * x[1] + x[1] * x[1]).collect();
        let a = pr.apply(&f);
        let b = pr.apply_repr(&f);
        for (i, x) in p.chunks(2).enumerate() {
            assert!((a.eval(x) - f[i]).abs() < 1e-9);
            assert!((b.eval(x) - f[i]).abs() < 1e-9);
        }
        assert!(pr.h_sup.iter().all(|h| h.is_finite()));
    }

    #[test]
    fn collinear_points_are_degenerate_for_linear() {
        let p = [0.0, 0.5, 0.5, 0.5, 1.0, 0.5];
        let w = [1.0; 3];
        let q = Cube::new(vec![0.5, 0.5], 0.5).unwrap();
        let r = Projection::from_points(2, &p, &w, &q, 1);
        assert!(matches!(r, Err(Error::DegenerateGeometry { .. })));
    }
}
