use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::{Cube, Grid};
use crate::scalar::{csum, Real};

use super::poly::{PolySpace, Polynomial};

/// IRLS smoothing, relative to `max |f|`.
pub const IRLS_EPS: f64 = 1e-12;
/// IRLS stops when the value moves less than this, relative to the
/// normalized L¹ size of `f`.
pub const IRLS_TOL: f64 = 1e-9;
pub const IRLS_MAX_ITER: usize = 500;
/// Relative pivot threshold below which a basis column is treated as dependent.
pub const RANK_TOL: f64 = 1e-8;

/// Function samples with positive weights (atoms or grid cells).
#[derive(Clone, Copy, Debug)]
pub struct Sample<'a, T> {
    pub n: usize,
    pub points: &'a [T],
    pub weights: &'a [T],
    pub values: &'a [T],
}

impl<T> Sample<'_, T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Normalized local best approximation and its minimizer.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxResult<T> {
    pub value: T,
    pub minimizer: Polynomial<T>,
    pub u: u32,
    pub residual_norm_history: Vec<T>,
    /// The minimizer is determined by the support (full numerical rank).
    pub unique: bool,
    pub converged: bool,
    pub support: usize,
}

/// Weighted least squares by modified Gram–Schmidt with one
/// reorthogonalization pass. Returns coefficients (dependent columns get 0),
/// the numerical rank and the weighted residual.
pub(crate) fn weighted_lsq<T: Real>(basis: &[T], dim: usize, sqrtw: &[T], rhs: &[T]) -> (Vec<T>, usize, Vec<T>) {
    let m = sqrtw.len();
    let mut qs: Vec<Vec<T>> = Vec::with_capacity(dim);
    let mut kept: Vec<usize> = Vec::with_capacity(dim);
    let mut r = vec![vec![T::zero(); dim]; dim];
    for j in 0..dim {
        let mut v: Vec<T> = (0..m).map(|i| sqrtw[i] * basis[i * dim + j]).collect();
        let norm0 = csum(v.iter().map(|&x| x * x)).sqrt();
        let mut rcol = vec![T::zero(); qs.len()];
        for _ in 0..2 {
            for (t, q) in qs.iter().enumerate() {
                let c = csum(q.iter().zip(&v).map(|(&a, &b)| a * b));
                for (vi, &qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
                rcol[t] += c;
            }
        }
        let nv = csum(v.iter().map(|&x| x * x)).sqrt();
        if !(norm0 > T::zero()) || nv <= T::lit(RANK_TOL) * norm0 {
            continue;
        }
        let s = qs.len();
        for (t, &c) in rcol.iter().enumerate() {
            r[t][s] = c;
        }
        r[s][s] = nv;
        for vi in &mut v {
            *vi /= nv;
        }
        qs.push(v);
        kept.push(j);
    }
    let mut res: Vec<T> = (0..m).map(|i| sqrtw[i] * rhs[i]).collect();
    let mut c = vec![T::zero(); qs.len()];
    for _ in 0..2 {
        for (t, q) in qs.iter().enumerate() {
            let d = csum(q.iter().zip(&res).map(|(&a, &b)| a * b));
            for (ri, &qi) in res.iter_mut().zip(q) {
                *ri -= d * qi;
            }
            c[t] += d;
        }
    }
    let rank = qs.len();
    let mut x = vec![T::zero(); rank];
    for s in (0..rank).rev() {
        let mut acc = c[s];
        for t in s + 1..rank {
            acc -= r[s][t] * x[t];
        }
        x[s] = acc / r[s][s];
    }
    let mut coeffs = vec![T::zero(); dim];
    for (s, &j) in kept.iter().enumerate() {
        coeffs[j] = x[s];
    }
    (coeffs, rank, res)
}

fn basis_matrix<T: Real>(space: &PolySpace<T>, sample: &Sample<'_, T>) -> Vec<T> {
    let dim = space.dim();
    let mut out = vec![T::zero(); sample.len() * dim];
    for i in 0..sample.len() {
        space.eval_basis(&sample.points[i * sample.n..(i + 1) * sample.n], &mut out[i * dim..(i + 1) * dim]);
    }
    out
}

fn residuals<T: Real>(basis: &[T], dim: usize, coeffs: &[T], values: &[T]) -> Vec<T> {
    values
        .iter()
        .enumerate()
        .map(|(i, &f)| f - (0..dim).map(|j| basis[i * dim + j] * coeffs[j]).sum::<T>())
        .collect()
}

/// `E` over `space` (polynomials of degree `≤ k−1`) in the normalized
/// `L^u(weights)` norm. Does not fail on IRLS non-convergence; check
/// `converged`.
pub fn best_approx_sample<T: Real>(sample: &Sample<'_, T>, space: PolySpace<T>, u: u32) -> Result<ApproxResult<T>> {
    if u != 1 && u != 2 {
        return Err(Error::Parameter(format!("u must be 1 or 2, got {u}")));
    }
    if sample.is_empty() {
        return Err(Error::EmptySupport);
    }
    let total = csum(sample.weights.iter().copied());
    let omega: Vec<T> = sample.weights.iter().map(|&w| w / total).collect();
    let dim = space.dim();
    let uu = T::from_u32(u).unwrap();
    if dim == 0 {
        let value = csum(omega.iter().zip(sample.values).map(|(&w, &f)| w * f.abs().powf(uu))).powf(uu.recip());
        return Ok(ApproxResult {
            value,
            minimizer: Polynomial::zero(space),
            u,
            residual_norm_history: Vec::new(),
            unique: true,
            converged: true,
            support: sample.len(),
        });
    }
    if dim == 1 && u == 1 {
        // The L¹ best constant is a weighted median.
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| sample.values[a].partial_cmp(&sample.values[b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
        let half = T::lit(0.5);
        let mut acc = T::zero();
        let mut c = sample.values[order[0]];
        for &i in &order {
            acc += omega[i];
            c = sample.values[i];
            if acc >= half {
                break;
            }
        }
        let value = csum(omega.iter().zip(sample.values).map(|(&w, &f)| w * (f - c).abs()));
        let mut minimizer = Polynomial::zero(space);
        minimizer.coeffs[0] = c;
        return Ok(ApproxResult { value, minimizer, u, residual_norm_history: vec![value], unique: true, converged: true, support: sample.len() });
    }
    let basis = basis_matrix(&space, sample);
    let sqrtw: Vec<T> = omega.iter().map(|w| w.sqrt()).collect();
    let (coeffs, rank, res) = weighted_lsq(&basis, dim, &sqrtw, sample.values);
    let unique = rank == dim;
    if u == 2 {
        let value = csum(res.iter().map(|&r| r * r)).sqrt();
        return Ok(ApproxResult {
            value,
            minimizer: Polynomial { space, coeffs },
            u,
            residual_norm_history: vec![value],
            unique,
            converged: true,
            support: sample.len(),
        });
    }
    let fmax = sample.values.iter().fold(T::zero(), |m, &f| m.max(f.abs()));
    let fscale = csum(omega.iter().zip(sample.values).map(|(&w, &f)| w * f.abs()));
    let l1 = |r: &[T]| csum(omega.iter().zip(r).map(|(&w, &x)| w * x.abs()));
    let mut coeffs = coeffs;
    let mut r = residuals(&basis, dim, &coeffs, sample.values);
    let mut value = l1(&r);
    let mut history = vec![value];
    let mut best = (value, coeffs.clone());
    // An exact fit is already optimal; descent and IRLS stall on it.
    if !(fscale > T::zero()) || value <= T::lit(IRLS_TOL) * fscale {
        return Ok(ApproxResult { value, minimizer: Polynomial { space, coeffs }, u, residual_norm_history: history, unique, converged: true, support: sample.len() });
    }
    if unique {
        if let Some((c, v, steps)) = l1_vertex_descent(&basis, dim, &omega, sample.values, &coeffs) {
            history.extend(steps);
            if v <= best.0 {
                return Ok(ApproxResult {
                    value: v,
                    minimizer: Polynomial { space, coeffs: c },
                    u,
                    residual_norm_history: history,
                    unique,
                    converged: true,
                    support: sample.len(),
                });
            }
        }
    }
    let eps = T::lit(IRLS_EPS) * fmax;
    let tol = T::lit(IRLS_TOL) * fscale;
    let mut converged = false;
    for _ in 0..IRLS_MAX_ITER {
        let sw: Vec<T> = omega.iter().zip(&r).map(|(&w, &ri)| (w / (ri * ri + eps * eps).sqrt()).sqrt()).collect();
        let (c, _, _) = weighted_lsq(&basis, dim, &sw, sample.values);
        coeffs = c;
        r = residuals(&basis, dim, &coeffs, sample.values);
        let next = l1(&r);
        history.push(next);
        if next < best.0 {
            best = (next, coeffs.clone());
        }
        let done = (next - value).abs() < tol;
        value = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(ApproxResult {
        value: best.0,
        minimizer: Polynomial { space, coeffs: best.1 },
        u,
        residual_norm_history: history,
        unique,
        converged,
        support: sample.len(),
    })
}

/// Solves the square system `m x = b` by partial-pivot elimination; `None`
/// when numerically singular.
fn solve_square<T: Real>(mut m: Vec<T>, mut b: Vec<T>, d: usize) -> Option<Vec<T>> {
    let scale = m.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b2| m[a * d + col].abs().partial_cmp(&m[b2 * d + col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(m[piv * d + col].abs() > T::lit(RANK_TOL) * scale) {
            return None;
        }
        if piv != col {
            for k in 0..d {
                m.swap(piv * d + k, col * d + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..d {
            let fct = m[row * d + col] / m[col * d + col];
            for k in col..d {
                let v = m[col * d + k];
                m[row * d + k] -= fct * v;
            }
            let v = b[col];
            b[row] -= fct * v;
        }
    }
    let mut x = vec![T::zero(); d];
    for row in (0..d).rev() {
        let mut acc = b[row];
        for k in row + 1..d {
            acc -= m[row * d + k] * x[k];
        }
        x[row] = acc / m[row * d + row];
    }
    Some(x)
}

/// Exact weighted L¹ fit by descent along the edges of the interpolation
/// polytope: a vertex interpolates `f` at `dim` points; each step drops one
/// of them, moves along the edge with the most negative directional
/// derivative and stops at the breakpoint found by an exact line search.
/// Starts from the points where `start` fits best. Returns `None` if no
/// vertex is found or the step cap is hit.
fn l1_vertex_descent<T: Real>(basis: &[T], dim: usize, omega: &[T], f: &[T], start: &[T]) -> Option<(Vec<T>, T, Vec<T>)> {
    use std::cmp::Ordering;
    let m = omega.len();
    if m < dim {
        return None;
    }
    let row = |i: usize| &basis[i * dim..(i + 1) * dim];
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x * y).sum::<T>();
    let by_key = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
    let r0 = residuals(basis, dim, start, f);
    let mut order: Vec<(T, usize)> = r0.iter().enumerate().map(|(i, r)| (r.abs(), i)).collect();
    let head = (4 * dim).min(m);
    if head < m {
        order.select_nth_unstable_by(head - 1, by_key);
    }
    order[..head].sort_unstable_by(by_key);
    // Greedy independent set by incremental elimination.
    let mut chosen: Vec<usize> = Vec::with_capacity(dim);
    let mut reduced: Vec<Vec<T>> = Vec::with_capacity(dim);
    let rscale = basis.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    for pos in 0..m {
        if pos == head {
            order[head..].sort_unstable_by(by_key);
        }
        let i = order[pos].1;
        let mut v = row(i).to_vec();
        for q in &reduced {
            let c = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(x, &y)| *x -= c * y);
        }
        let nv = dot(&v, &v).sqrt();
        if nv > T::lit(1e-6) * rscale {
            v.iter_mut().for_each(|x| *x /= nv);
            reduced.push(v);
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    if chosen.len() < dim {
        return None;
    }
    let fmax = f.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let zero = T::lit(1e-14) * fmax.max(T::min_positive_value());
    let mut basis_idx = chosen;
    let mut basic = vec![false; m];
    basis_idx.iter().for_each(|&i| basic[i] = true);
    let mut steps = Vec::new();
    let max_steps = 20 * (m + dim);
    // Side of each point relative to the fit; kept for zero residuals so that
    // degenerate vertices pivot like a simplex method.
    let mut sigma = vec![T::one(); m];
    let mut degenerate_last = false;
    let mut g = vec![T::zero(); m * dim];
    let mut r = vec![T::zero(); m];
    let mut brk: Vec<(T, usize)> = Vec::with_capacity(m);
    for _ in 0..max_steps {
        let mat: Vec<T> = basis_idx.iter().flat_map(|&i| row(i).iter().copied()).collect();
        let c = solve_square(mat.clone(), basis_idx.iter().map(|&i| f[i]).collect(), dim)?;
        // Edge directions d_j solve M d_j = e_j, i.e. φ_{b_l}·d_j = δ_lj.
        let mut inv = vec![T::zero(); dim * dim];
        for j in 0..dim {
            let mut e = vec![T::zero(); dim];
            e[j] = T::one();
            let d = solve_square(mat.clone(), e, dim)?;
            for (a, &x) in d.iter().enumerate() {
                inv[a * dim + j] = x;
            }
        }
        let mut lean = vec![T::zero(); dim];
        let mut mag: Vec<T> = basis_idx.iter().map(|&b| omega[b]).collect();
        for (i, (phi, gi)) in basis.chunks_exact(dim).zip(g.chunks_exact_mut(dim)).enumerate() {
            let mut fit = T::zero();
            for j in 0..dim {
                gi[j] = T::zero();
            }
            for a in 0..dim {
                let pa = phi[a];
                fit += pa * c[a];
                let inv_row = &inv[a * dim..(a + 1) * dim];
                for j in 0..dim {
                    gi[j] += pa * inv_row[j];
                }
            }
            r[i] = f[i] - fit;
            if basic[i] {
                continue;
            }
            if r[i].abs() > zero {
                sigma[i] = r[i].signum();
            }
            let ws = omega[i] * sigma[i];
            for ((l, mg), &x) in lean.iter_mut().zip(mag.iter_mut()).zip(gi.iter()) {
                *l += ws * x;
                *mg += omega[i] * x.abs();
            }
        }
        let value = csum(omega.iter().zip(&r).map(|(&w, &x)| w * x.abs()));
        steps.push(value);
        let mut best: Option<(T, usize, T)> = None;
        for j in 0..dim {
            let thresh = -T::lit(1e-12) * mag[j];
            for sign in [T::one(), -T::one()] {
                let slope = omega[basis_idx[j]] - sign * lean[j];
                let better = match &best {
                    None => true,
                    Some(b) => !degenerate_last && slope < b.0,
                };
                if slope < thresh && better {
                    best = Some((slope, j, sign));
                }
            }
        }
        let Some((slope, j, sign)) = best else {
            return Some((c, value, steps));
        };
        // Exact line search over the points whose residual moves toward zero.
        brk.clear();
        for i in (0..m).filter(|&i| !basic[i]) {
            let gij = sign * g[i * dim + j];
            if sigma[i] * gij > T::zero() {
                let t = if r[i].abs() <= zero { T::zero() } else { (r[i] / gij).max(T::zero()) };
                brk.push((t, i));
            }
        }
        // Only a short prefix is usually walked, so sort it in chunks.
        let mut s = slope;
        let mut entering = None;
        let mut sorted = 0;
        for pos in 0..brk.len() {
            if pos == sorted {
                let chunk = (2 * sorted).max(8).min(brk.len());
                if chunk < brk.len() {
                    brk[sorted..].select_nth_unstable_by(chunk - sorted - 1, by_key);
                }
                brk[sorted..chunk].sort_unstable_by(by_key);
                sorted = chunk;
            }
            let (t, i) = brk[pos];
            let w = omega[i] * g[i * dim + j].abs();
            s += w + w;
            if s >= T::zero() {
                entering = Some((i, t));
                break;
            }
            sigma[i] = -sigma[i];
        }
        let (entering, t) = entering?;
        let leaving = basis_idx[j];
        sigma[leaving] = -sign;
        basic[leaving] = false;
        basic[entering] = true;
        basis_idx[j] = entering;
        degenerate_last = t <= T::zero();
    }
    None
}

/// Strict variant: IRLS non-convergence is an error carrying the best value.
pub fn best_approx<T: Real>(sample: &Sample<'_, T>, space: PolySpace<T>, u: u32) -> Result<ApproxResult<T>> {
    let r = best_approx_sample(sample, space, u)?;
    if !r.converged {
        return Err(Error::Convergence { iterations: IRLS_MAX_ITER, best: r.value.as_f64() });
    }
    Ok(r)
}

/// Gathers the listed points of a flat array into a contiguous sample.
pub(crate) struct Gathered<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> Gathered<T> {
    pub fn from_indices(n: usize, points: &[T], weights: &[T], values: &[T], idx: &[usize]) -> Self {
        let mut p = Vec::with_capacity(idx.len() * n);
        for &i in idx {
            p.extend_from_slice(&points[i * n..(i + 1) * n]);
        }
        Self { points: p, weights: idx.iter().map(|&i| weights[i]).collect(), values: idx.iter().map(|&i| values[i]).collect() }
    }

    pub fn sample(&self, n: usize) -> Sample<'_, T> {
        Sample { n, points: &self.points, weights: &self.weights, values: &self.values }
    }

    /// Weighted centroid, used as a subset-determined anchor.
    pub fn centroid(&self, n: usize) -> Vec<T> {
        let w = csum(self.weights.iter().copied());
        (0..n).map(|a| csum(self.weights.iter().enumerate().map(|(i, &wi)| wi * self.points[i * n + a])) / w).collect()
    }
}

/// `ℰ_k(f, Q)_{L^u(S)}` over the atoms in the closed cube, basis anchored at `Q`.
pub fn best_approx_on_set<T: Real>(s: &DSet<T>, f: &[T], q: &Cube<T>, k: usize, u: u32) -> Result<ApproxResult<T>> {
    let idx = s.atoms_in(q);
    let g = Gathered::from_indices(s.n(), s.atoms(), s.weights(), f, &idx);
    best_approx(&g.sample(s.n()), PolySpace::for_approx(k, q.center.clone(), q.side()), u)
}

/// `ℰ_k(f, Q)_{L^u}` for Lebesgue measure sampled at grid midpoints inside `Q`.
pub fn best_approx_on_grid<T: Real>(grid: &Grid<T>, values: &[T], q: &Cube<T>, k: usize, u: u32) -> Result<ApproxResult<T>> {
    let idx = grid_indices_in(grid, q);
    let pts: Vec<T> = idx.iter().flat_map(|&i| grid.point(i)).collect();
    let w = vec![grid.cell_volume(); idx.len()];
    let v: Vec<T> = idx.iter().map(|&i| values[i]).collect();
    let sample = Sample { n: grid.n, points: &pts, weights: &w, values: &v };
    best_approx(&sample, PolySpace::for_approx(k, q.center.clone(), q.side()), u)
}

/// Linear indices of grid midpoints in the closed cube, ascending.
pub fn grid_indices_in<T: Real>(grid: &Grid<T>, q: &Cube<T>) -> Vec<usize> {
    let mut ranges = Vec::with_capacity(grid.n);
    for a in 0..grid.n {
        match grid.axis_range(a, q.lower(a), q.upper(a)) {
            Some(r) => ranges.push(r),
            None => return Vec::new(),
        }
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        out.push(grid.linear_index(&cur));
        for a in 0..cur.len() {
            cur[a] += 1;
            if cur[a] <= ranges[a].1 {
                continue 'outer;
            }
            cur[a] = ranges[a].0;
        }
        break;
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_1d<'a>(pts: &'a [f64], w: &'a [f64], v: &'a [f64]) -> Sample<'a, f64> {
        Sample { n: 1, points: pts, weights: w, values: v }
    }

    #[test]
    fn k0_is_normalized_norm() {
        let pts = [0.0, 1.0];
        let w = [1.0, 1.0];
        let v = [2.0, 2.0];
        let r = best_approx(&sample_1d(&pts, &w, &v), PolySpace::for_approx(0, vec![0.0], 1.0), 2).unwrap();
        assert_eq!(r.value, 2.0);
    }

    #[test]
    fn linear_data_has_zero_error_for_k2() {
        let pts = [0.0, 0.3, 0.7, 1.0];
        let w = [0.1, 0.2, 0.3, 0.4];
        let v: Vec<f64> = pts.iter().map(|x| 3.0 - 2.0 * x).collect();
        for u in [1, 2] {
            let r = best_approx(&sample_1d(&pts, &w, &v), PolySpace::for_approx(2, vec![0.5], 1.0), u).unwrap();
            assert!(r.value < 1e-10, "u={u} value={}", r.value);
        }
    }

    #[test]
    fn exact_l1_fit_returns_without_iterating() {
        let pts: Vec<f64> = (0..400).map(|i| (i as f64 * 0.618).fract()).collect();
        let w = vec![1.0; pts.len()];
        let v: Vec<f64> = pts.iter().map(|x| 0.25 + x).collect();
        let r = best_approx(&sample_1d(&pts, &w, &v), PolySpace::for_approx(2, vec![0.5], 1.0), 1).unwrap();
        assert!(r.converged && r.value < 1e-12);
        assert_eq!(r.residual_norm_history.len(), 1);
    }

    #[test]
    fn k1_u2_is_weighted_std() {
        let pts = [0.0, 1.0, 2.0];
        let w = [1.0, 2.0, 1.0];
        let v = [1.0, 3.0, 7.0];
        let r = best_approx(&sample_1d(&pts, &w, &v), PolySpace::for_approx(1, vec![1.0], 1.0), 2).unwrap();
        let mean = (1.0 + 6.0 + 7.0) / 4.0;
        let var = ((1.0 - mean) * (1.0f64 - mean) + 2.0 * (3.0 - mean) * (3.0 - mean) + (7.0 - mean) * (7.0 - mean)) / 4.0;
        assert!((r.value - var.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn empty_support_errors() {
        let r = best_approx(&sample_1d(&[], &[], &[]), PolySpace::for_approx(1, vec![0.0], 1.0), 2);
        assert!(matches!(r, Err(Error::EmptySupport)));
    }

    #[test]
    fn rank_deficiency_is_flagged() {
        let pts = [0.5, 0.5, 0.5];
        let w = [1.0; 3];
        let v = [1.0, 2.0, 3.0];
        let r = best_approx(&sample_1d(&pts, &w, &v), PolySpace::for_approx(2, vec![0.0], 1.0), 2).unwrap();
        assert!(!r.unique);
        assert!((r.value - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn l1_fit_matches_vertex_enumeration() {
        use rand::Rng;
        let mut rng = crate::scalar::trial_rng(7, 0);
        for trial in 0..20 {
            let m = 9 + trial % 5;
            let pts: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
            let tot: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / tot).collect();
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sample = Sample { n: 2, points: &pts, weights: &w, values: &v };
            let r = best_approx(&sample, PolySpace::for_approx(2, vec![0.0, 0.0], 1.0), 1).unwrap();
            // An optimal affine L¹ fit interpolates three of the data points.
            let mut best = f64::INFINITY;
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        let (p, q, s) = (&pts[2 * a..2 * a + 2], &pts[2 * b..2 * b + 2], &pts[2 * c..2 * c + 2]);
                        let det = (q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]);
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        let gx = ((v[b] - v[a]) * (s[1] - p[1]) - (v[c] - v[a]) * (q[1] - p[1])) / det;
                        let gy = ((q[0] - p[0]) * (v[c] - v[a]) - (s[0] - p[0]) * (v[b] - v[a])) / det;
                        let err: f64 = (0..m)
                            .map(|i| w[i] * (v[i] - v[a] - gx * (pts[2 * i] - p[0]) - gy * (pts[2 * i + 1] - p[1])).abs())
                            .sum();
                        best = best.min(err);
                    }
                }
            }
            assert!(r.converged);
            assert!((r.value - best).abs() < 1e-12, "trial {trial}: {} vs {best}", r.value);
        }
    }

    #[test]
    fn l1_fit_on_degenerate_grid_matches_enumeration() {
        use rand::Rng;
        let mut rng = crate::scalar::trial_rng(11, 0);
        let side = 5usize;
        let m = side * side;
        let pts: Vec<f64> = (0..m).flat_map(|i| [(i % side) as f64, (i / side) as f64]).collect();
        let w = vec![1.0 / m as f64; m];
        for trial in 0..30 {
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-2i32..=2) as f64).collect();
            let sample = Sample { n: 2, points: &pts, weights: &w, values: &v };
            let r = best_approx(&sample, PolySpace::for_approx(2, vec![2.0, 2.0], 2.0), 1).unwrap();
            let mut best = f64::INFINITY;
            for a in 0..m {
                for b in a + 1..m {
                    for c in b + 1..m {
                        let (p, q, s) = (&pts[2 * a..2 * a + 2], &pts[2 * b..2 * b + 2], &pts[2 * c..2 * c + 2]);
                        let det = (q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]);
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        let gx = ((v[b] - v[a]) * (s[1] - p[1]) - (v[c] - v[a]) * (q[1] - p[1])) / det;
                        let gy = ((q[0] - p[0]) * (v[c] - v[a]) - (s[0] - p[0]) * (v[b] - v[a])) / det;
                        let err: f64 = (0..m)
                            .map(|i| w[i] * (v[i] - v[a] - gx * (pts[2 * i] - p[0]) - gy * (pts[2 * i + 1] - p[1])).abs())
                            .sum();
                        best = best.min(err);
                    }
                }
            }
            assert!(r.converged);
            assert!((r.value - best).abs() < 1e-12, "trial {trial}: {} vs {best}", r.value);
        }
    }
}
