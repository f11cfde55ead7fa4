//! Slow reference paths for the norm computations: no spatial index, no
//! subset sharing, plain loops over all pairs. Only the local solver is
//! shared with the fast path.

use anyhow::Result;
use besov_trace::approx::{best_approx_sample, PolySpace, Sample};
use besov_trace::geometry::Grid;
use besov_trace::norms::{subset_approx, GridQuadrature, NormParams};
use besov_trace::DSet;

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn lp(values: &[f64], weights: &[f64], p: f64) -> f64 {
    let mut acc = 0.0;
    for (v, w) in values.iter().zip(weights) {
        acc += w * v.abs().powf(p);
    }
    acc.powf(1.0 / p)
}

fn lq(values: &[f64], q: f64) -> f64 {
    lp(values, &vec![1.0; values.len()], q)
}

/// Total Besov norm of atom samples.
pub fn set_norm(f: &[f64], s: &DSet, params: &NormParams, trace: bool) -> Result<f64> {
    params.validate()?;
    let (j0, j1) = params.resolved_window(s.spacing())?;
    let a = if trace { params.alpha - params.trace_loss(s.n(), s.d()) } else { params.alpha };
    let mut terms = Vec::new();
    for j in j0..=j1 {
        let r = (-j as f64).exp2();
        let mut e = Vec::with_capacity(s.len());
        for i in 0..s.len() {
            let idx: Vec<usize> = (0..s.len()).filter(|&m| sup_dist(s.atom(m), s.atom(i)) <= r).collect();
            e.push(subset_approx(s, f, &idx, 2.0 * r, params.k, params.u)?.0);
        }
        terms.push((j as f64 * a).exp2() * lp(&e, s.weights(), params.p));
    }
    Ok(lp(f, s.weights(), params.p) + lq(&terms, params.q))
}

/// `ℰ_k` at every outer point and scale, each cube found by scanning the
/// whole grid. Requires a quadrature that keeps every inner point.
fn grid_table(grid: &Grid<f64>, values: &[f64], k: usize, u: u32, j0: i32, j1: i32, stride: usize) -> Result<(Vec<usize>, Vec<Vec<f64>>)> {
    let n = grid.n;
    let outer: Vec<usize> = (0..grid.len()).filter(|&i| grid.multi_index(i).iter().all(|&m| m % stride == stride / 2)).collect();
    let mut table = Vec::new();
    for j in j0..=j1 {
        let r = (-j as f64).exp2();
        let w = (r / grid.step * (1.0 + 16.0 * f64::EPSILON)).floor() as i64;
        let mut row = Vec::with_capacity(outer.len());
        for &c in &outer {
            let ci = grid.multi_index(c);
            let mut pts = Vec::new();
            let mut vals = Vec::new();
            for (i, &v) in values.iter().enumerate() {
                let mi = grid.multi_index(i);
                if mi.iter().zip(&ci).all(|(&a, &b)| (a as i64 - b as i64).abs() <= w) {
                    pts.extend(grid.point(i));
                    vals.push(v);
                }
            }
            let ones = vec![1.0; vals.len()];
            let sample = Sample { n, points: &pts, weights: &ones, values: &vals };
            row.push(best_approx_sample(&sample, PolySpace::for_approx(k, grid.point(c), 2.0 * r), u)?.value);
        }
        table.push(row);
    }
    Ok((outer, table))
}

fn grid_lp(grid: &Grid<f64>, values: &[f64], p: f64) -> f64 {
    lp(values, &vec![grid.cell_volume(); values.len()], p)
}

/// Total Besov norm of a grid function under a full-inner quadrature.
pub fn grid_besov(grid: &Grid<f64>, values: &[f64], params: &NormParams, quad: &GridQuadrature) -> Result<f64> {
    params.validate()?;
    let (j0, j1) = params.resolved_window(grid.step)?;
    let (outer, table) = grid_table(grid, values, params.k, params.u, j0, j1, quad.outer_stride)?;
    let w = vec![grid.cell_volume() * (quad.outer_stride as f64).powi(grid.n as i32); outer.len()];
    let terms: Vec<f64> = table.iter().zip(j0..=j1).map(|(row, j)| (j as f64 * params.alpha).exp2() * lp(row, &w, params.p)).collect();
    Ok(grid_lp(grid, values, params.p) + lq(&terms, params.q))
}

/// Total Triebel–Lizorkin norm of a grid function (local `L¹` approximations).
pub fn grid_tl(grid: &Grid<f64>, values: &[f64], params: &NormParams, quad: &GridQuadrature) -> Result<f64> {
    params.validate()?;
    let (j0, j1) = params.resolved_window(grid.step)?;
    let (outer, table) = grid_table(grid, values, params.k, 1, j0, j1, quad.outer_stride)?;
    let w = vec![grid.cell_volume() * (quad.outer_stride as f64).powi(grid.n as i32); outer.len()];
    let mut g = Vec::with_capacity(outer.len());
    for i in 0..outer.len() {
        let per: Vec<f64> = table.iter().zip(j0..=j1).map(|(row, j)| (j as f64 * params.alpha).exp2() * row[i]).collect();
        g.push(lq(&per, params.q));
    }
    Ok(grid_lp(grid, values, params.p) + lp(&g, &w, params.p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use besov_trace::dset::{build_dset, IfsSpec};
    use besov_trace::geometry::Cube;
    use besov_trace::norms::{besov_norm_on_grid, besov_norm_on_set, tl_norm_on_grid};

    #[test]
    fn reference_agrees_with_fast_paths() {
        let s: DSet = build_dset(&IfsSpec::four_corner(3)).unwrap();
        let f: Vec<f64> = (0..s.len()).map(|i| (3.0 * s.atom(i)[0]).sin() + s.atom(i)[1].powi(2)).collect();
        let pr = NormParams { alpha: 0.9, p: 2.0, q: 2.0, u: 1, k: 2, j_min: 0, j_max: 4 };
        let fast = besov_norm_on_set(&f, &s, &pr, true).unwrap().total;
        assert!((set_norm(&f, &s, &pr, true).unwrap() - fast).abs() < 1e-12 * fast);

        let grid = Grid::over(&Cube::new(vec![0.5, 0.5], 0.5).unwrap(), 16).unwrap();
        let v = grid.sample(|x: &[f64]| (x[0] - 0.3).abs() + x[1] * x[0]);
        let quad = GridQuadrature { outer_stride: 2, inner_max: 1001 };
        let pr = NormParams { p: 1.5, q: 1.5, u: 1, k: 1, ..pr };
        let b = besov_norm_on_grid(&grid, &v, &pr, &quad).unwrap().total;
        assert!((grid_besov(&grid, &v, &pr, &quad).unwrap() - b).abs() < 1e-12 * b);
        let t = tl_norm_on_grid(&grid, &v, &pr, &quad).unwrap().total;
        assert!((grid_tl(&grid, &v, &pr, &quad).unwrap() - t).abs() < 1e-12 * t);
    }
}
