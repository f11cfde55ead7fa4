use rayon::prelude::*;
use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::{Cube, Grid};
use crate::scalar::{CompensatedSum, Real};

/// Cube averages of a grid function at the atoms along a ladder of scales.
#[derive(Clone, Debug, Serialize)]
pub struct TraceResult<T> {
    pub ladder: Vec<T>,
    /// `steps[m][atom]`: average over `Q(atom, ladder[m])`.
    pub steps: Vec<Vec<T>>,
    /// Finest-scale averages.
    pub values: Vec<T>,
    /// `|finest − previous|` per atom (0 for a one-step ladder).
    pub convergence: Vec<T>,
}

/// Average of the cellwise-constant extension of grid values over a cube,
/// weighting cells by their overlap with it.
pub fn cube_average<T: Real>(grid: &Grid<T>, values: &[T], q: &Cube<T>) -> T {
    let n = grid.n;
    let h = grid.step;
    let mut ranges: Vec<Vec<(usize, T)>> = Vec::with_capacity(n);
    for a in 0..n {
        let lo = q.lower(a);
        let hi = q.upper(a);
        let i0 = ((lo - grid.origin[a]) / h).floor().to_i64().unwrap_or(0).max(0) as usize;
        let i1 = (((hi - grid.origin[a]) / h).ceil().to_i64().unwrap_or(0).max(0) as usize).min(grid.size);
        let mut r = Vec::new();
        for i in i0..i1 {
            let c0 = grid.origin[a] + T::from_usize_lossy(i) * h;
            let ov = (hi.min(c0 + h) - lo.max(c0)).max(T::zero());
            if ov > T::zero() {
                r.push((i, ov));
            }
        }
        ranges.push(r);
    }
    if ranges.iter().any(Vec::is_empty) {
        return T::zero();
    }
    let mut acc = CompensatedSum::new();
    let mut pos = vec![0usize; n];
    let mut mi = vec![0usize; n];
    'outer: loop {
        let mut w = T::one();
        for a in 0..n {
            let (i, ov) = ranges[a][pos[a]];
            mi[a] = i;
            w *= ov;
        }
        acc.add(w * values[grid.linear_index(&mi)]);
        for a in 0..n {
            pos[a] += 1;
            if pos[a] < ranges[a].len() {
                continue 'outer;
            }
            pos[a] = 0;
        }
        break;
    }
    acc.value() / q.volume()
}

/// Trace of a grid function on the atoms via `⨍_{Q(x,t)}` for a decreasing
/// ladder of `t`. Scales below the grid step, or cubes leaving the grid
/// region, are resolution errors.
pub fn trace<T: Real>(grid: &Grid<T>, values: &[T], s: &DSet<T>, ladder: &[T]) -> Result<TraceResult<T>> {
    if ladder.is_empty() {
        return Err(Error::Parameter("empty trace ladder".into()));
    }
    if values.len() != grid.len() {
        return Err(Error::Parameter(format!("{} samples for a grid of {} points", values.len(), grid.len())));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter("trace ladder must be strictly decreasing".into()));
    }
    let finest = *ladder.last().expect("non-empty");
    if finest < grid.step {
        return Err(Error::Resolution(format!("trace scale {finest} is below the grid step {}", grid.step)));
    }
    let region = grid.region();
    for i in 0..s.len() {
        let q = Cube { center: s.atom(i).to_vec(), half_side: ladder[0] };
        if !region.contains_cube(&q) {
            return Err(Error::Resolution(format!("averaging cube of scale {} around atom {i} leaves the grid", ladder[0])));
        }
    }
    let steps: Vec<Vec<T>> = ladder
        .iter()
        .map(|&t| (0..s.len()).into_par_iter().map(|i| cube_average(grid, values, &Cube { center: s.atom(i).to_vec(), half_side: t })).collect())
        .collect();
    let values = steps.last().expect("non-empty").clone();
    let convergence = if steps.len() >= 2 {
        let prev = &steps[steps.len() - 2];
        values.iter().zip(prev).map(|(a, b)| (*a - *b).abs()).collect()
    } else {
        vec![T::zero(); values.len()]
    };
    Ok(TraceResult { ladder: ladder.to_vec(), steps, values, convergence })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn average_of_linear_field_is_center_value() {
        let g = Grid::over(&Cube::new(vec![0.5, 0.5], 0.5).unwrap(), 64).unwrap();
        let v = g.sample(|x| 2.0 * x[0] - x[1]);
        let aligned = Cube::new(vec![0.5, 0.25], 0.125).unwrap();
        assert!((cube_average(&g, &v, &aligned) - 0.75f64).abs() < 1e-12);
        let h = g.step;
        let q = Cube::new(vec![0.4, 0.55], 0.1).unwrap();
        // Partial cells bias the average by at most 2·(h²/8)·|∂f|/side per axis.
        assert!((cube_average(&g, &v, &q) - 0.25f64).abs() < 4.0 * h * h);
    }
}
