use std::collections::HashMap;

use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::cube::{Coords, Cube, DyadicCube};
use super::index::BoxKind;

/// Cap on the number of dyadic cubes examined while building a cover.
pub const MAX_WHITNEY_CUBES: usize = 1 << 24;

/// Bump supports are the dilations `(9/8)Q`.
pub const BUMP_DILATION: f64 = 9.0 / 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CubeRef {
    Whitney(usize),
    Residual(usize),
}

/// Dyadic Whitney decomposition of `region ∖ S` down to a finest level.
#[derive(Clone, Debug)]
pub struct WhitneyCover<T> {
    /// Kept cubes in canonical order.
    pub cubes: Vec<DyadicCube>,
    /// Finest-level cubes still closer to `S` than their diameter.
    pub residual: Vec<DyadicCube>,
    pub bounding_region: Cube<T>,
    pub top_level: i32,
    pub min_level: i32,
    /// Largest number of cubes whose `(9/8)`-dilations meet a given one's.
    pub overlap_bound: usize,
    pub residual_volume: T,
    lookup: HashMap<DyadicCube, CubeRef>,
    levels: Vec<i32>,
    neighbors: Vec<Vec<u32>>,
    residual_neighbors: Vec<Vec<u32>>,
}

fn level_of_alignment<T: Real>(region: &Cube<T>) -> Option<i32> {
    let side = region.side().as_f64();
    (-40..=60).find(|&j| {
        let s = 2f64.powi(j);
        let m = side * s;
        m >= 1.0 && m == m.floor() && (0..region.dim()).all(|a| {
            let v = region.lower(a).as_f64() * s;
            v == v.floor()
        })
    })
}

fn dyadic_box<T: Real>(q: &DyadicCube, pad: T) -> (Vec<T>, Vec<T>) {
    let n = q.dim();
    ((0..n).map(|a| q.lower::<T>(a) - pad).collect(), (0..n).map(|a| q.upper::<T>(a) + pad).collect())
}

/// `dist(Q, S) ≥ t`: no atom in the open box `(lo − t, hi + t)`.
pub fn dist_at_least<T: Real>(s: &DSet<T>, q: &DyadicCube, t: T) -> bool {
    let (lo, hi) = dyadic_box(q, t);
    !s.index().any_in_box(&lo, &hi, BoxKind::Open)
}

/// `dist(Q, S) ≤ t`: some atom in the closed box `[lo − t, hi + t]`.
pub fn dist_at_most<T: Real>(s: &DSet<T>, q: &DyadicCube, t: T) -> bool {
    let (lo, hi) = dyadic_box(q, t);
    s.index().any_in_box(&lo, &hi, BoxKind::Closed)
}

/// Finest Whitney level that resolves the atom spacing with two levels to spare.
pub fn default_finest_level<T: Real>(s: &DSet<T>) -> i32 {
    let h = s.spacing().as_f64();
    if h > 0.0 {
        (1.0 / h).log2().ceil() as i32 + 2
    } else {
        12
    }
}

/// The bounding cube of `S` dilated three times (`[-1,2]^n` for the unit cube).
pub fn default_region<T: Real>(s: &DSet<T>) -> Cube<T> {
    s.bounding().scaled(T::lit(3.0))
}

/// `(9/8)`-dilation of a dyadic cube along one axis, in units of `2^{-unit}`.
fn dilated_interval(q: &DyadicCube, axis: usize, unit: i32) -> (i128, i128) {
    let shift = unit - (q.level + 4);
    debug_assert!((0..100).contains(&shift));
    let k = q.coords[axis] as i128;
    ((16 * k - 1) << shift, (16 * k + 17) << shift)
}

/// Closed `(9/8)`-dilations intersect (exact).
pub fn dilations_intersect(a: &DyadicCube, b: &DyadicCube) -> bool {
    let unit = a.level.max(b.level) + 4;
    (0..a.dim()).all(|ax| {
        let (a0, a1) = dilated_interval(a, ax, unit);
        let (b0, b1) = dilated_interval(b, ax, unit);
        a0 <= b1 && b0 <= a1
    })
}

/// Decomposes `region ∖ S` into dyadic cubes with `diam Q ≤ dist(Q,S) ≤ 4 diam Q`.
///
/// The region must be a union of dyadic cubes; its coarsest such level is
/// the top level. Cubes at `min_level` that are still too close to `S` are
/// dropped and reported as residual.
pub fn whitney_decompose<T: Real>(s: &DSet<T>, region: &Cube<T>, min_level: i32) -> Result<WhitneyCover<T>> {
    let n = s.n();
    if region.dim() != n {
        return Err(Error::Geometry("region dimension differs from the set".into()));
    }
    for i in 0..s.len() {
        if !region.contains(s.atom(i)) {
            return Err(Error::Geometry(format!("atom {i} lies outside the region")));
        }
    }
    let top = level_of_alignment(region)
        .ok_or_else(|| Error::Geometry("region is not a union of dyadic cubes".into()))?;
    if min_level < top {
        return Err(Error::Parameter(format!("min_level {min_level} is coarser than the region's top level {top}")));
    }
    let scale = 2f64.powi(top);
    let counts: Vec<i64> = vec![(region.side().as_f64() * scale) as i64; n];
    let base: Vec<i64> = (0..n).map(|a| (region.lower(a).as_f64() * scale) as i64).collect();
    let total_top = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c as usize));
    if total_top.is_none_or(|t| t > MAX_WHITNEY_CUBES) {
        return Err(Error::Resource("region spans too many top-level cubes".into()));
    }
    let mut stack: Vec<DyadicCube> = Vec::new();
    for lin in 0..total_top.unwrap_or(0) {
        let mut rem = lin;
        let coords: Coords = (0..n)
            .map(|a| {
                let c = counts[a] as usize;
                let k = base[a] + (rem % c) as i64;
                rem /= c;
                k
            })
            .collect();
        stack.push(DyadicCube { level: top, coords });
    }
    let mut cubes = Vec::new();
    let mut residual = Vec::new();
    let mut examined = 0usize;
    while let Some(q) = stack.pop() {
        examined += 1;
        if examined > MAX_WHITNEY_CUBES {
            return Err(Error::Resource(format!("Whitney recursion to level {min_level} exceeds {MAX_WHITNEY_CUBES} cubes")));
        }
        let l = q.side::<T>();
        if dist_at_least(s, &q, l) {
            if !dist_at_most(s, &q, T::lit(4.0) * l) {
                return Err(Error::Geometry(format!(
                    "top-level cube {:?} is farther than four diameters from the set; shrink the region",
                    q.coords.as_slice()
                )));
            }
            cubes.push(q);
        } else if q.level >= min_level {
            residual.push(q);
        } else {
            stack.extend(q.children());
        }
    }
    cubes.sort();
    residual.sort();
    let residual_volume = crate::scalar::csum(residual.iter().map(|q| q.volume::<T>()));
    let mut lookup = HashMap::with_capacity(cubes.len() + residual.len());
    for (i, q) in cubes.iter().enumerate() {
        lookup.insert(q.clone(), CubeRef::Whitney(i));
    }
    for (i, q) in residual.iter().enumerate() {
        lookup.insert(q.clone(), CubeRef::Residual(i));
    }
    let mut levels: Vec<i32> = cubes.iter().chain(&residual).map(|q| q.level).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut cover = WhitneyCover {
        cubes,
        residual,
        bounding_region: region.clone(),
        top_level: top,
        min_level,
        overlap_bound: 0,
        residual_volume,
        lookup,
        levels,
        neighbors: Vec::new(),
        residual_neighbors: Vec::new(),
    };
    cover.neighbors = cover.cubes.iter().map(|q| cover.dilated_neighbors(q)).collect();
    cover.residual_neighbors = cover.residual.iter().map(|q| cover.dilated_neighbors(q)).collect();
    cover.overlap_bound = cover.neighbors.iter().map(Vec::len).max().unwrap_or(0);
    Ok(cover)
}

impl<T: Real> WhitneyCover<T> {
    /// Whitney cubes whose `(9/8)`-dilation meets that of `q`. Such cubes
    /// differ from a Whitney cube (or a residual cube) by at most two levels.
    fn dilated_neighbors(&self, q: &DyadicCube) -> Vec<u32> {
        let mut out = Vec::new();
        for lv in q.level - 2..=q.level + 2 {
            let shift = lv - q.level;
            let ranges: Vec<(i64, i64)> = q
                .coords
                .iter()
                .map(|&k| {
                    if shift >= 0 {
                        ((k << shift) - 1, ((k + 1) << shift))
                    } else {
                        (k.div_euclid(1 << -shift) - 1, (k + 1).div_euclid(1 << -shift) + 1)
                    }
                })
                .collect();
            let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'outer: loop {
                let cand = DyadicCube { level: lv, coords: cur.iter().copied().collect() };
                if let Some(CubeRef::Whitney(i)) = self.lookup.get(&cand) {
                    if dilations_intersect(q, &cand) {
                        out.push(*i as u32);
                    }
                }
                for a in 0..cur.len() {
                    cur[a] += 1;
                    if cur[a] <= ranges[a].1 {
                        continue 'outer;
                    }
                    cur[a] = ranges[a].0;
                }
                break;
            }
        }
        out.sort_unstable();
        out
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    pub fn get(&self, r: CubeRef) -> &DyadicCube {
        match r {
            CubeRef::Whitney(i) => &self.cubes[i],
            CubeRef::Residual(i) => &self.residual[i],
        }
    }

    /// Whitney cubes whose dilations meet the dilation of the given cube.
    pub fn neighbors(&self, r: CubeRef) -> &[u32] {
        match r {
            CubeRef::Whitney(i) => &self.neighbors[i],
            CubeRef::Residual(i) => &self.residual_neighbors[i],
        }
    }

    /// All cubes (kept or residual) containing `x`, canonical order, kept first.
    pub fn containing_all(&self, x: &[T]) -> Vec<CubeRef> {
        let mut out = Vec::new();
        for &lv in &self.levels {
            let scale = T::exp2i(lv);
            let opts: Vec<SmallOpts> = x
                .iter()
                .map(|&xi| {
                    let v = xi * scale;
                    let f = v.floor();
                    let k = f.to_i64().unwrap_or(i64::MAX / 4);
                    if v == f {
                        SmallOpts { a: k - 1, b: Some(k) }
                    } else {
                        SmallOpts { a: k, b: None }
                    }
                })
                .collect();
            let combos = 1usize << opts.len();
            for mask in 0..combos {
                let mut coords = Coords::new();
                let mut valid = true;
                for (a, o) in opts.iter().enumerate() {
                    if mask >> a & 1 == 1 {
                        match o.b {
                            Some(b) => coords.push(b),
                            None => {
                                valid = false;
                                break;
                            }
                        }
                    } else {
                        coords.push(o.a);
                    }
                }
                if !valid {
                    continue;
                }
                if let Some(&r) = self.lookup.get(&DyadicCube { level: lv, coords }) {
                    out.push(r);
                }
            }
        }
        out.sort_by(|a, b| {
            let ka = matches!(a, CubeRef::Residual(_));
            let kb = matches!(b, CubeRef::Residual(_));
            ka.cmp(&kb).then_with(|| self.get(*a).cmp(self.get(*b)))
        });
        out
    }

    /// Canonical cube containing `x` (kept cubes preferred).
    pub fn locate(&self, x: &[T]) -> Option<CubeRef> {
        self.containing_all(x).into_iter().next()
    }

    /// Total volume of the kept cubes.
    pub fn covered_volume(&self) -> T {
        crate::scalar::csum(self.cubes.iter().map(|q| q.volume::<T>()))
    }

    /// Number of kept cubes violating `diam Q ≤ dist(Q,S) ≤ 4 diam Q`.
    pub fn count_violations(&self, s: &DSet<T>) -> usize {
        self.cubes
            .iter()
            .filter(|q| {
                let l = q.side::<T>();
                !(dist_at_least(s, q, l) && dist_at_most(s, q, T::lit(4.0) * l))
            })
            .count()
    }
}

struct SmallOpts {
    a: i64,
    b: Option<i64>,
}
