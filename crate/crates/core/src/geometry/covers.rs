use std::collections::HashMap;

use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::scalar::{sup_dist, Real};

use super::cube::Cube;

/// Cubes `Q(x, 2^{-i}Δ)` centred at atoms covering `S`, with a colouring of
/// the doubled cubes into disjoint classes.
#[derive(Clone, Debug, Serialize)]
pub struct CoverFamily<T> {
    pub level: i32,
    pub delta: T,
    /// Atom index of each cube centre.
    pub centers: Vec<usize>,
    pub cubes: Vec<Cube<T>>,
    pub overlap_bound: usize,
    /// Color of each cube; `color_classes[c]` lists the cubes of color `c`.
    pub colors: Vec<usize>,
    pub color_classes: Vec<Vec<usize>>,
}

pub const MIN_COVER_LEVEL: i32 = -10;

fn cell_of<T: Real>(x: &[T], cell: T) -> Vec<i64> {
    x.iter().map(|&v| (v / cell).floor().to_i64().unwrap_or(0)).collect()
}

fn neighbor_cells(c: &[i64]) -> Vec<Vec<i64>> {
    let n = c.len();
    (0..3usize.pow(n as u32))
        .map(|mut m| {
            c.iter()
                .map(|&k| {
                    let o = (m % 3) as i64 - 1;
                    m /= 3;
                    k + o
                })
                .collect()
        })
        .collect()
}

/// Greedy covering: atoms are scanned in index order and an atom becomes a
/// centre when its sup distance to every earlier centre exceeds
/// `2·2^{-i}Δ/5` (the fifths of the chosen cubes are disjoint). Colors are
/// assigned greedily in centre order on the graph `2Q ∩ 2R ≠ ∅`.
pub fn build_covers<T: Real>(s: &DSet<T>, level: i32, delta: T) -> Result<CoverFamily<T>> {
    if level < MIN_COVER_LEVEL {
        return Err(Error::Parameter(format!("cover level must be at least {MIN_COVER_LEVEL}")));
    }
    if !(delta > T::zero()) {
        return Err(Error::Parameter("delta must be positive".into()));
    }
    let half = T::exp2i(-level) * delta;
    let sep = T::lit(2.0) * half / T::lit(5.0);
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut centers = Vec::new();
    for i in 0..s.len() {
        let x = s.atom(i);
        let cell = cell_of(x, sep);
        let close = neighbor_cells(&cell).iter().any(|c| {
            grid.get(c).is_some_and(|v| v.iter().any(|&j| sup_dist(s.atom(centers[j]), x) <= sep))
        });
        if !close {
            grid.entry(cell).or_default().push(centers.len());
            centers.push(i);
        }
    }
    let cubes: Vec<Cube<T>> = centers.iter().map(|&i| Cube { center: s.atom(i).to_vec(), half_side: half }).collect();
    // 2Q ∩ 2R ≠ ∅ iff the centres are within 4·half.
    let reach = T::lit(4.0) * half;
    let mut big: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, q) in cubes.iter().enumerate() {
        big.entry(cell_of(&q.center, reach)).or_default().push(k);
    }
    let adjacency: Vec<Vec<usize>> = cubes
        .iter()
        .map(|q| {
            let mut v: Vec<usize> = neighbor_cells(&cell_of(&q.center, reach))
                .iter()
                .filter_map(|c| big.get(c))
                .flatten()
                .copied()
                .filter(|&r| sup_dist(&cubes[r].center, &q.center) <= reach)
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    let overlap_bound = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    let mut colors = vec![usize::MAX; cubes.len()];
    for k in 0..cubes.len() {
        let used: Vec<usize> = adjacency[k].iter().map(|&r| colors[r]).filter(|&c| c != usize::MAX).collect();
        colors[k] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    let ncolors = colors.iter().map(|&c| c + 1).max().unwrap_or(0);
    let mut color_classes = vec![Vec::new(); ncolors];
    for (k, &c) in colors.iter().enumerate() {
        color_classes[c].push(k);
    }
    Ok(CoverFamily { level, delta, centers, cubes, overlap_bound, colors, color_classes })
}

impl<T: Real> CoverFamily<T> {
    /// Indices of cubes `K` with `x ∈ 2K`.
    pub fn doubled_containing(&self, x: &[T]) -> Vec<usize> {
        (0..self.cubes.len()).filter(|&k| sup_dist(&self.cubes[k].center, x) <= self.cubes[k].half_side * T::lit(2.0)).collect()
    }
}
