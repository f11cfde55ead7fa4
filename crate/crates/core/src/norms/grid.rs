use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{best_approx_sample, PolySpace, Sample};
use crate::error::{Error, Result};
use crate::geometry::Grid;
use crate::scalar::Real;

use super::params::NormParams;
use super::report::{lq, weighted_lp, NormReport};

/// Sampling of the double sum over a grid: the outer `L^p` runs over every
/// `outer_stride`-th point per axis, each local approximation over at most
/// `inner_max` points per axis spread symmetrically through the cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridQuadrature {
    pub outer_stride: usize,
    pub inner_max: usize,
}

impl Default for GridQuadrature {
    fn default() -> Self {
        Self { outer_stride: 4, inner_max: 17 }
    }
}

impl GridQuadrature {
    pub fn validate(&self) -> Result<()> {
        if self.outer_stride == 0 || self.inner_max < 3 || self.inner_max.is_multiple_of(2) {
            return Err(Error::Parameter(format!("invalid grid quadrature {self:?}: stride ≥ 1 and odd inner_max ≥ 3 required")));
        }
        Ok(())
    }

    /// Outer sample indices along one axis.
    pub fn outer_axis(&self, size: usize) -> Vec<usize> {
        (self.outer_stride / 2..size).step_by(self.outer_stride).collect()
    }

    /// Symmetric index offsets covering `[−w, w]`.
    pub fn inner_offsets(&self, w: usize) -> Vec<i64> {
        if w.saturating_mul(2) < self.inner_max {
            return (-(w as i64)..=w as i64).collect();
        }
        let w = w as i64;
        let h = ((self.inner_max - 1) / 2) as i64;
        let mut out: Vec<i64> = (-h..=h).map(|t| ((t * w) as f64 / h as f64).round() as i64).collect();
        out.dedup();
        out
    }
}

/// Index half-width of `Q(x, r)` on the grid: points with `|i − c|·step ≤ r`.
pub fn half_width<T: Real>(grid: &Grid<T>, r: T) -> usize {
    (r / grid.step * (T::one() + T::epsilon() * T::lit(16.0))).floor().to_usize().unwrap_or(0)
}

/// `ℰ_k(f, Q(x, 2^{−j}))_{L^u}` at the outer points.
#[derive(Clone, Debug)]
pub struct GridScaleTable<T> {
    pub k: usize,
    pub u: u32,
    pub j_min: i32,
    pub quad: GridQuadrature,
    pub outer: Vec<usize>,
    pub outer_weight: T,
    /// `values[j − j_min][outer point]`.
    pub values: Vec<Vec<T>>,
    pub unconverged: usize,
}

impl<T> GridScaleTable<T> {
    pub fn j_max(&self) -> i32 {
        self.j_min + self.values.len() as i32 - 1
    }

    pub fn scale(&self, j: i32) -> &[T] {
        &self.values[(j - self.j_min) as usize]
    }
}

/// Local approximation at grid point `center` over the quadrature's inner
/// sample of `Q(x, r)`, clipped to the grid.
pub fn grid_local_approx<T: Real>(grid: &Grid<T>, values: &[T], center: usize, r: T, k: usize, u: u32, quad: &GridQuadrature) -> Result<(T, bool)> {
    let n = grid.n;
    let c = grid.multi_index(center);
    let offs = quad.inner_offsets(half_width(grid, r));
    let axes: Vec<Vec<usize>> = (0..n)
        .map(|a| offs.iter().filter_map(|&o| usize::try_from(c[a] as i64 + o).ok().filter(|&i| i < grid.size)).collect())
        .collect();
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    let mut mi = vec![0usize; n];
    let mut pos = vec![0usize; n];
    'outer: loop {
        for a in 0..n {
            mi[a] = axes[a][pos[a]];
        }
        let li = grid.linear_index(&mi);
        pts.extend((0..n).map(|a| grid.coord(a, mi[a])));
        vals.push(values[li]);
        for a in 0..n {
            pos[a] += 1;
            if pos[a] < axes[a].len() {
                continue 'outer;
            }
            pos[a] = 0;
        }
        break;
    }
    let w = vec![T::one(); vals.len()];
    let sample = Sample { n, points: &pts, weights: &w, values: &vals };
    let space = PolySpace::for_approx(k, grid.point(center), r + r);
    let res = best_approx_sample(&sample, space, u)?;
    Ok((res.value, res.converged))
}

/// Local approximation over grid points in an arbitrary closed cube, at most
/// `inner_max` per axis spread evenly across the covered index range. Returns
/// `None` when the cube holds no grid point.
pub fn grid_cube_approx<T: Real>(grid: &Grid<T>, values: &[T], cube: &crate::geometry::Cube<T>, k: usize, u: u32, inner_max: usize) -> Result<Option<(T, bool)>> {
    let n = grid.n;
    let mut axes = Vec::with_capacity(n);
    for a in 0..n {
        let Some((lo, hi)) = grid.axis_range(a, cube.lower(a), cube.upper(a)) else {
            return Ok(None);
        };
        let count = hi - lo + 1;
        let idx: Vec<usize> = if count <= inner_max {
            (lo..=hi).collect()
        } else {
            let m = inner_max.max(2);
            let mut v: Vec<usize> = (0..m).map(|t| lo + ((t * (hi - lo)) as f64 / (m - 1) as f64).round() as usize).collect();
            v.dedup();
            v
        };
        axes.push(idx);
    }
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    let mut mi = vec![0usize; n];
    let mut pos = vec![0usize; n];
    'outer: loop {
        for a in 0..n {
            mi[a] = axes[a][pos[a]];
        }
        pts.extend((0..n).map(|a| grid.coord(a, mi[a])));
        vals.push(values[grid.linear_index(&mi)]);
        for a in 0..n {
            pos[a] += 1;
            if pos[a] < axes[a].len() {
                continue 'outer;
            }
            pos[a] = 0;
        }
        break;
    }
    let w = vec![T::one(); vals.len()];
    let sample = Sample { n, points: &pts, weights: &w, values: &vals };
    let res = best_approx_sample(&sample, PolySpace::for_approx(k, cube.center.clone(), cube.side()), u)?;
    Ok(Some((res.value, res.converged)))
}

pub fn grid_scale_table<T: Real>(
    grid: &Grid<T>,
    values: &[T],
    k: usize,
    u: u32,
    j_min: i32,
    j_max: i32,
    quad: &GridQuadrature,
) -> Result<GridScaleTable<T>> {
    quad.validate()?;
    if values.len() != grid.len() {
        return Err(Error::Parameter(format!("{} samples for a grid of {} points", values.len(), grid.len())));
    }
    let axis = quad.outer_axis(grid.size);
    let mut outer = Vec::new();
    let mut pos = vec![0usize; grid.n];
    'outer: loop {
        let mi: Vec<usize> = pos.iter().map(|&p| axis[p]).collect();
        outer.push(grid.linear_index(&mi));
        for p in pos.iter_mut() {
            *p += 1;
            if *p < axis.len() {
                continue 'outer;
            }
            *p = 0;
        }
        break;
    }
    let outer_weight = grid.cell_volume() * T::from_usize_lossy(quad.outer_stride).powi(grid.n as i32);
    let mut table = Vec::new();
    let mut unconverged = 0;
    for j in j_min..=j_max {
        let r = T::exp2i(-j);
        let solved: Vec<(T, bool)> = outer.par_iter().map(|&c| grid_local_approx(grid, values, c, r, k, u, quad)).collect::<Result<_>>()?;
        unconverged += solved.iter().filter(|v| !v.1).count();
        table.push(solved.into_iter().map(|v| v.0).collect());
    }
    Ok(GridScaleTable { k, u, j_min, quad: *quad, outer, outer_weight, values: table, unconverged })
}

fn grid_lp<T: Real>(grid: &Grid<T>, values: &[T], p: f64) -> T {
    let p = T::lit(p);
    (crate::scalar::csum(values.iter().map(|v| v.abs().powf(p))) * grid.cell_volume()).powf(p.recip())
}

/// Besov norm from a table: `‖f‖_p + (Σ_j (2^{jα}‖ℰ_j‖_p)^q)^{1/q}`.
pub fn besov_from_grid_table<T: Real>(grid: &Grid<T>, values: &[T], table: &GridScaleTable<T>, params: &NormParams) -> NormReport<T> {
    let w = vec![table.outer_weight; table.outer.len()];
    let per_scale = (table.j_min..=table.j_max())
        .map(|j| (j, T::lit((j as f64 * params.alpha).exp2()) * weighted_lp(table.scale(j), &w, params.p)))
        .collect();
    NormReport::from_scales(grid_lp(grid, values, params.p), per_scale, params.q, table.unconverged)
}

/// Triebel–Lizorkin norm from a table: `‖f‖_p + ‖g‖_p` with
/// `g(x) = (Σ_j (2^{jα} ℰ_j(x))^q)^{1/q}`. Per-scale entries are the same as
/// for the Besov norm.
pub fn tl_from_grid_table<T: Real>(grid: &Grid<T>, values: &[T], table: &GridScaleTable<T>, params: &NormParams) -> NormReport<T> {
    let w = vec![table.outer_weight; table.outer.len()];
    let factors: Vec<T> = (table.j_min..=table.j_max()).map(|j| T::lit((j as f64 * params.alpha).exp2())).collect();
    let g: Vec<T> = (0..table.outer.len()).map(|i| lq(table.values.iter().zip(&factors).map(|(v, &f)| f * v[i]), params.q)).collect();
    let per_scale = (table.j_min..=table.j_max()).zip(&factors).map(|(j, &f)| (j, f * weighted_lp(table.scale(j), &w, params.p))).collect();
    NormReport::new(grid_lp(grid, values, params.p), weighted_lp(&g, &w, params.p), per_scale, table.unconverged)
}

fn grid_window<T: Real>(grid: &Grid<T>, params: &NormParams) -> Result<(i32, i32)> {
    params.validate()?;
    params.resolved_window(grid.step.as_f64())
}

/// Discretized Besov norm of a grid function (Lebesgue measure).
pub fn besov_norm_on_grid<T: Real>(grid: &Grid<T>, values: &[T], params: &NormParams, quad: &GridQuadrature) -> Result<NormReport<T>> {
    let (j0, j1) = grid_window(grid, params)?;
    let table = grid_scale_table(grid, values, params.k, params.u, j0, j1, quad)?;
    Ok(besov_from_grid_table(grid, values, &table, params))
}

/// Discretized Triebel–Lizorkin norm; local approximations always in `L¹`.
pub fn tl_norm_on_grid<T: Real>(grid: &Grid<T>, values: &[T], params: &NormParams, quad: &GridQuadrature) -> Result<NormReport<T>> {
    let (j0, j1) = grid_window(grid, params)?;
    let table = grid_scale_table(grid, values, params.k, 1, j0, j1, quad)?;
    Ok(tl_from_grid_table(grid, values, &table, params))
}

/// `sup_j 2^{jα} ℰ_k(f, Q(x, 2^{−j}))_{L¹}` over the resolved window, using
/// every grid point of the cube; requires `k = ⌊α⌋ + 1`.
pub fn sharp_maximal<T: Real>(grid: &Grid<T>, values: &[T], x: usize, params: &NormParams) -> Result<T> {
    let k = params.alpha.floor() as usize + 1;
    if params.k != k {
        return Err(Error::Parameter(format!("sharp maximal function needs k = ⌊α⌋ + 1 = {k}, got {}", params.k)));
    }
    let (j0, j1) = params.resolved_window(grid.step.as_f64())?;
    let full = GridQuadrature { outer_stride: 1, inner_max: usize::MAX };
    let mut best = T::zero();
    for j in j0..=j1 {
        let (e, _) = grid_local_approx(grid, values, x, T::exp2i(-j), k, 1, &full)?;
        best = best.max(T::lit((j as f64 * params.alpha).exp2()) * e);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Cube;

    fn setup() -> (Grid<f64>, NormParams) {
        let g = Grid::over(&Cube::new(vec![0.5, 0.5], 0.5).unwrap(), 32).unwrap();
        (g, NormParams { alpha: 0.5, p: 2.0, q: 2.0, u: 1, k: 1, j_min: 0, j_max: 3 })
    }

    #[test]
    fn offsets_are_symmetric_and_bounded() {
        let q = GridQuadrature { outer_stride: 1, inner_max: 5 };
        assert_eq!(q.inner_offsets(1), vec![-1, 0, 1]);
        assert_eq!(q.inner_offsets(8), vec![-8, -4, 0, 4, 8]);
    }

    #[test]
    fn tl_equals_besov_at_p_eq_q() {
        let (g, p) = setup();
        let v = g.sample(|x| (3.0 * x[0]).sin() + x[1] * x[1]);
        let q = GridQuadrature::default();
        let b = besov_norm_on_grid(&g, &v, &p, &q).unwrap();
        let t = tl_norm_on_grid(&g, &v, &p, &q).unwrap();
        assert!((b.seminorm_part - t.seminorm_part).abs() <= 1e-12 * b.seminorm_part);
    }

    #[test]
    fn sharp_maximal_vanishes_on_constants() {
        let (g, p) = setup();
        let v = vec![2.0; g.len()];
        assert_eq!(sharp_maximal(&g, &v, 100, &p).unwrap(), 0.0);
        assert!(sharp_maximal(&g, &v, 100, &NormParams { k: 2, ..p }).is_err());
    }
}
