use serde::Serialize;
use smallvec::SmallVec;

use crate::scalar::Real;

pub type MultiIndex = SmallVec<[u32; 4]>;

/// Multi-indices of total degree `≤ degree`, graded, and within a degree in
/// decreasing lexicographic order (`(1,0)` before `(0,1)`).
pub fn multi_indices(n: usize, degree: i32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=degree.max(-1) {
        let mut cur = MultiIndex::from_elem(0, n);
        push_degree(&mut out, &mut cur, 0, deg as u32);
    }
    out
}

fn push_degree(out: &mut Vec<MultiIndex>, cur: &mut MultiIndex, axis: usize, left: u32) {
    let n = cur.len();
    if axis + 1 == n {
        cur[axis] = left;
        out.push(cur.clone());
        return;
    }
    for v in (0..=left).rev() {
        cur[axis] = v;
        push_degree(out, cur, axis + 1, left - v);
    }
    cur[axis] = 0;
}

/// Dimension of `𝒫_{k-1}`: `C(n+k-1, n)` for `k ≥ 1`, 0 for `k = 0`.
pub fn approx_dim(n: usize, k: usize) -> usize {
    if k == 0 {
        return 0;
    }
    binomial(n + k - 1, n)
}

pub fn binomial(a: usize, b: usize) -> usize {
    (0..b).fold(1usize, |acc, i| acc * (a - i) / (i + 1))
}

/// Polynomials of degree `≤ degree` in the monomials `((x − c)/s)^ν`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolySpace<T> {
    pub n: usize,
    pub degree: i32,
    pub indices: Vec<MultiIndex>,
    pub center: Vec<T>,
    pub scale: T,
}

impl<T: Real> PolySpace<T> {
    pub fn new(degree: i32, center: Vec<T>, scale: T) -> Self {
        let n = center.len();
        Self { n, degree, indices: multi_indices(n, degree), center, scale }
    }

    /// `𝒫_{k-1}` anchored at a cube centre with the cube's side as scale.
    pub fn for_approx(k: usize, center: Vec<T>, scale: T) -> Self {
        Self::new(k as i32 - 1, center, scale)
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    fn stride(&self) -> usize {
        self.degree.max(0) as usize + 1
    }

    /// Flattened per-axis powers `t_a^e`, stride `degree + 1`.
    fn powers(&self, x: &[T]) -> SmallVec<[T; 24]> {
        let st = self.stride();
        let mut p = SmallVec::with_capacity(self.n * st);
        for a in 0..self.n {
            let t = (x[a] - self.center[a]) / self.scale;
            let mut v = T::one();
            for _ in 0..st {
                p.push(v);
                v *= t;
            }
        }
        p
    }

    /// Basis values at `x` written into `out` (length `dim`).
    pub fn eval_basis(&self, x: &[T], out: &mut [T]) {
        let pw = self.powers(x);
        let st = self.stride();
        for (o, nu) in out.iter_mut().zip(&self.indices) {
            *o = nu.iter().enumerate().fold(T::one(), |acc, (a, &e)| acc * pw[a * st + e as usize]);
        }
    }

    pub fn eval(&self, coeffs: &[T], x: &[T]) -> T {
        let pw = self.powers(x);
        let st = self.stride();
        coeffs
            .iter()
            .zip(&self.indices)
            .map(|(&c, nu)| c * nu.iter().enumerate().fold(T::one(), |acc, (a, &e)| acc * pw[a * st + e as usize]))
            .sum()
    }

    pub fn gradient(&self, coeffs: &[T], x: &[T]) -> Vec<T> {
        let pw = self.powers(x);
        let st = self.stride();
        (0..self.n)
            .map(|b| {
                let mut g = T::zero();
                for (&c, nu) in coeffs.iter().zip(&self.indices) {
                    if nu[b] == 0 {
                        continue;
                    }
                    let mut m = T::from_u32(nu[b]).unwrap() / self.scale;
                    for (a, &e) in nu.iter().enumerate() {
                        let e = if a == b { e - 1 } else { e };
                        m *= pw[a * st + e as usize];
                    }
                    g += c * m;
                }
                g
            })
            .collect()
    }
}

/// A polynomial with its anchored basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial<T> {
    pub space: PolySpace<T>,
    pub coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn zero(space: PolySpace<T>) -> Self {
        let coeffs = vec![T::zero(); space.dim()];
        Self { space, coeffs }
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.space.eval(&self.coeffs, x)
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        self.space.gradient(&self.coeffs, x)
    }

    pub fn degree(&self) -> i32 {
        self.space.degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_counts_match_binomials() {
        for n in 1..4 {
            for k in 0..5 {
                assert_eq!(multi_indices(n, k as i32 - 1).len(), approx_dim(n, k));
            }
        }
        let idx = multi_indices(2, 1);
        assert_eq!(idx.len(), 3);
        assert_eq!(idx[1].as_slice(), &[1, 0]);
        assert_eq!(idx[2].as_slice(), &[0, 1]);
    }

    #[test]
    fn anchored_evaluation_and_gradient() {
        let sp = PolySpace::<f64>::new(2, vec![1.0, 2.0], 0.5);
        // p = 1 + 2·u + 3·v·u... with u = (x-1)/0.5, v = (y-2)/0.5
        let mut c = vec![0.0; sp.dim()];
        c[0] = 1.0;
        c[1] = 2.0; // u
        c[4] = 3.0; // u v
        assert_eq!(sp.indices[4].as_slice(), &[1, 1]);
        let x = [1.5, 2.25];
        let (u, v) = (1.0f64, 0.5f64);
        assert!((sp.eval(&c, &x) - (1.0 + 2.0 * u + 3.0 * u * v)).abs() < 1e-14);
        let g = sp.gradient(&c, &x);
        assert!((g[0] - (2.0 + 3.0 * v) / 0.5).abs() < 1e-13);
        assert!((g[1] - 3.0 * u / 0.5).abs() < 1e-13);
    }
}
