use std::collections::HashMap;

use rayon::prelude::*;

use crate::approx::{best_approx_sample, Gathered, PolySpace};
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::scalar::Real;

use super::params::NormParams;
use super::report::{weighted_lp, NormReport};

/// `ℰ_k(f, Q(x, 2^{−j}))_{L^u(S)}` for every atom `x` and every `j` in a window.
#[derive(Clone, Debug)]
pub struct SetScaleTable<T> {
    pub k: usize,
    pub u: u32,
    pub j_min: i32,
    /// `values[j − j_min][atom]`.
    pub values: Vec<Vec<T>>,
    pub unconverged: usize,
}

impl<T> SetScaleTable<T> {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.values.len() as i32 - 1
    }

    pub fn scale(&self, j: i32) -> &[T] {
        &self.values[(j - self.j_min) as usize]
    }
}

/// `ℰ_k` of `f` on an atom subset. The basis is anchored at the weighted
/// centroid with scale `side`, so the value depends on the subset only.
pub fn subset_approx<T: Real>(s: &DSet<T>, f: &[T], idx: &[usize], side: T, k: usize, u: u32) -> Result<(T, bool)> {
    let n = s.n();
    let g = Gathered::from_indices(n, s.atoms(), s.weights(), f, idx);
    let space = PolySpace::for_approx(k, g.centroid(n), side);
    let r = best_approx_sample(&g.sample(n), space, u)?;
    Ok((r.value, r.converged))
}

/// Builds the table. Cubes around different atoms with the same atom subset
/// share one solve.
pub fn set_scale_table<T: Real>(s: &DSet<T>, f: &[T], k: usize, u: u32, j_min: i32, j_max: i32) -> Result<SetScaleTable<T>> {
    if f.len() != s.len() {
        return Err(Error::Parameter(format!("{} samples for {} atoms", f.len(), s.len())));
    }
    let mut values = Vec::with_capacity((j_max - j_min + 1).max(0) as usize);
    let mut unconverged = 0;
    for j in j_min..=j_max {
        let r = T::exp2i(-j);
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut subsets: Vec<Vec<usize>> = Vec::new();
        let mut which = Vec::with_capacity(s.len());
        for i in 0..s.len() {
            let idx = s.atoms_in(&Cube { center: s.atom(i).to_vec(), half_side: r });
            let next = subsets.len();
            let id = *ids.entry(idx).or_insert_with_key(|key| {
                subsets.push(key.clone());
                next
            });
            which.push(id);
        }
        let solved: Vec<(T, bool)> = subsets.par_iter().map(|idx| subset_approx(s, f, idx, r + r, k, u)).collect::<Result<_>>()?;
        unconverged += solved.iter().filter(|v| !v.1).count();
        values.push(which.iter().map(|&id| solved[id].0).collect());
    }
    Ok(SetScaleTable { k, u, j_min, values, unconverged })
}

/// Norm from a precomputed table. `trace` lowers the weight exponent to
/// `α − (n − d)/p`.
pub fn set_norm_from_table<T: Real>(s: &DSet<T>, f: &[T], table: &SetScaleTable<T>, params: &NormParams, trace: bool) -> NormReport<T> {
    let a = if trace { params.alpha - params.trace_loss(s.n(), s.d()) } else { params.alpha };
    let lp = weighted_lp(f, s.weights(), params.p);
    let per_scale = (table.j_min..=table.j_max())
        .map(|j| (j, T::lit((j as f64 * a).exp2()) * weighted_lp(table.scale(j), s.weights(), params.p)))
        .collect();
    NormReport::from_scales(lp, per_scale, params.q, table.unconverged)
}

/// Discretized Besov norm of atom samples `f` on `S`.
pub fn besov_norm_on_set<T: Real>(f: &[T], s: &DSet<T>, params: &NormParams, trace: bool) -> Result<NormReport<T>> {
    params.validate()?;
    let (j0, j1) = params.resolved_window(s.spacing().as_f64())?;
    let table = set_scale_table(s, f, params.k, params.u, j0, j1)?;
    Ok(set_norm_from_table(s, f, &table, params, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dset::{build_dset, IfsSpec};

    fn params() -> NormParams {
        NormParams { alpha: 0.9, p: 2.0, q: 2.0, u: 2, k: 2, j_min: 0, j_max: 3 }
    }

    #[test]
    fn constants_and_linear_have_zero_seminorm() {
        let s = build_dset::<f64>(&IfsSpec::four_corner(3)).unwrap();
        let c = vec![3.0; s.len()];
        let r = besov_norm_on_set(&c, &s, &params(), false).unwrap();
        assert!(r.seminorm_part < 1e-12);
        assert!((r.total - 3.0).abs() < 1e-12);
        let lin: Vec<f64> = (0..s.len()).map(|i| 1.0 + s.atom(i)[0] - 2.0 * s.atom(i)[1]).collect();
        assert!(besov_norm_on_set(&lin, &s, &params(), false).unwrap().seminorm_part < 1e-10);
    }
}
