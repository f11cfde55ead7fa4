use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::cube::DyadicCube;
use super::index::BoxKind;
use super::whitney::{dist_at_least, dist_at_most};

/// Largest porosity constant tried.
pub const MAX_KAPPA: f64 = 65536.0;

/// Cap on cubes enumerated for one near-set family.
pub const MAX_FAMILY_SCAN: usize = 1 << 23;

/// Dyadic cubes `Q ⊆ bounding(S)` of levels `0..=max_level` with
/// `dist(x_Q, S) ≤ γ ℓ(Q)`, in canonical order.
#[derive(Clone, Debug, Serialize)]
pub struct NearSetFamily {
    pub gamma: f64,
    pub max_level: i32,
    pub cubes: Vec<DyadicCube>,
}

fn center_near<T: Real>(s: &DSet<T>, q: &DyadicCube, gamma: T) -> bool {
    let c = q.center::<T>();
    let t = gamma * q.side::<T>();
    let lo: Vec<T> = c.iter().map(|&x| x - t).collect();
    let hi: Vec<T> = c.iter().map(|&x| x + t).collect();
    s.index().any_in_box(&lo, &hi, BoxKind::Closed)
}

/// Coordinate range of level-`j` dyadic cubes inside the bounding cube.
fn level_ranges<T: Real>(s: &DSet<T>, level: i32) -> Vec<(i64, i64)> {
    let b = s.bounding();
    let scale = T::exp2i(level);
    (0..s.n())
        .map(|a| {
            let lo = (b.lower(a) * scale).ceil().to_i64().unwrap_or(0);
            let hi = (b.upper(a) * scale).floor().to_i64().unwrap_or(0) - 1;
            (lo, hi)
        })
        .collect()
}

pub fn near_set_family<T: Real>(s: &DSet<T>, gamma: T, max_level: i32) -> Result<NearSetFamily> {
    if !(gamma > T::zero()) {
        return Err(Error::Parameter("gamma must be positive".into()));
    }
    if max_level < 0 {
        return Err(Error::Parameter("max_level must be nonnegative".into()));
    }
    let mut cubes = Vec::new();
    let mut scanned = 0usize;
    for level in 0..=max_level {
        let ranges = level_ranges(s, level);
        if ranges.iter().any(|&(lo, hi)| hi < lo) {
            continue;
        }
        let total = ranges.iter().try_fold(1usize, |acc, &(lo, hi)| acc.checked_mul((hi - lo + 1) as usize));
        let per_atom = {
            let w = (gamma.as_f64() + 1.0).ceil() as usize * 2 + 1;
            w.checked_pow(s.n() as u32).and_then(|c| c.checked_mul(s.len()))
        };
        let candidates: Vec<DyadicCube> = match (total, per_atom) {
            (Some(t), Some(p)) if t <= p => {
                scanned += t;
                if scanned > MAX_FAMILY_SCAN {
                    return Err(Error::Resource("near-set family scan exceeds budget".into()));
                }
                enumerate_box(level, &ranges)
            }
            (_, Some(p)) => {
                scanned += p;
                if scanned > MAX_FAMILY_SCAN {
                    return Err(Error::Resource("near-set family scan exceeds budget".into()));
                }
                around_atoms(s, level, gamma, &ranges)
            }
            _ => return Err(Error::Resource("near-set family scan exceeds budget".into())),
        };
        cubes.extend(candidates.into_iter().filter(|q| center_near(s, q, gamma)));
    }
    cubes.sort();
    Ok(NearSetFamily { gamma: gamma.as_f64(), max_level, cubes })
}

fn enumerate_box(level: i32, ranges: &[(i64, i64)]) -> Vec<DyadicCube> {
    let mut out = Vec::new();
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    'outer: loop {
        out.push(DyadicCube { level, coords: cur.iter().copied().collect() });
        for a in 0..cur.len() {
            cur[a] += 1;
            if cur[a] <= ranges[a].1 {
                continue 'outer;
            }
            cur[a] = ranges[a].0;
        }
        break;
    }
    out
}

fn around_atoms<T: Real>(s: &DSet<T>, level: i32, gamma: T, ranges: &[(i64, i64)]) -> Vec<DyadicCube> {
    let scale = T::exp2i(level);
    let reach = gamma + T::one();
    let mut set = BTreeSet::new();
    for i in 0..s.len() {
        let local: Vec<(i64, i64)> = s
            .atom(i)
            .iter()
            .zip(ranges)
            .map(|(&x, &(lo, hi))| {
                let a = ((x * scale - reach).floor().to_i64().unwrap_or(lo)).max(lo);
                let b = ((x * scale + reach).ceil().to_i64().unwrap_or(hi)).min(hi);
                (a, b)
            })
            .collect();
        if local.iter().any(|&(a, b)| b < a) {
            continue;
        }
        for q in enumerate_box(level, &local) {
            set.insert(q);
        }
    }
    set.into_iter().collect()
}

/// Searches the lattice of step `r/(2κ)` in `Q(center, r)` for a point `y`
/// with `Q(y, r/κ) ∩ S = ∅`. Candidates are visited in lexicographic order.
pub fn find_hole<T: Real>(s: &DSet<T>, center: &[T], r: T, kappa: T) -> Option<Vec<T>> {
    let n = center.len();
    let steps = (kappa * T::lit(2.0)).round().to_i64().unwrap_or(2).max(1);
    let step = r / T::from_i64(steps).unwrap();
    let hole = r / kappa;
    let mut m = vec![-steps; n];
    let mut y = vec![T::zero(); n];
    let mut lo = vec![T::zero(); n];
    let mut hi = vec![T::zero(); n];
    'outer: loop {
        for a in 0..n {
            y[a] = center[a] + step * T::from_i64(m[a]).unwrap();
            lo[a] = y[a] - hole;
            hi[a] = y[a] + hole;
        }
        if !s.index().any_in_box(&lo, &hi, BoxKind::Closed) {
            return Some(y);
        }
        for a in 0..n {
            m[a] += 1;
            if m[a] <= steps {
                continue 'outer;
            }
            m[a] = -steps;
        }
        return None;
    }
}

/// Outcome of the porosity estimate, with the sample that needed the largest κ.
#[derive(Clone, Debug, Serialize)]
pub struct PorosityEstimate {
    pub kappa: f64,
    pub trials: usize,
    pub worst_center: Vec<f64>,
    pub worst_radius: f64,
}

/// Smallest κ in `{2, 4, 8, …, 2^16}` such that every sampled cube
/// `Q(x, r)` contains a hole of half-side `r/κ`. Radii are log-uniform in
/// `[16·spacing, min(1, half-side of the bounding cube)]` and `Q(x, r)` is
/// kept inside the bounding cube. Holes smaller than the atom spacing are not
/// accepted.
pub fn estimate_porosity<T: Real>(s: &DSet<T>, trials: usize, rng_seed: u64) -> Result<PorosityEstimate> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    let spacing = s.spacing();
    let b = s.bounding().clone();
    let r_hi = b.half_side.min(T::one());
    let r_lo = if spacing > T::zero() { T::lit(16.0) * spacing } else { T::exp2i(-10) }.min(r_hi);
    let (ln_lo, ln_hi) = (r_lo.as_f64().ln(), r_hi.as_f64().ln());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best = PorosityEstimate { kappa: 2.0, trials, worst_center: Vec::new(), worst_radius: 0.0 };
    for _ in 0..trials {
        let r = T::lit(if ln_hi > ln_lo { rng.gen_range(ln_lo..=ln_hi).exp() } else { r_hi.as_f64() });
        // Q(x, r) stays inside the bounding cube, so holes outside the set's hull do not count.
        let x: Vec<T> = (0..s.n())
            .map(|a| {
                let (lo, hi) = ((b.lower(a) + r).as_f64(), (b.upper(a) - r).as_f64());
                T::lit(if hi > lo { rng.gen_range(lo..=hi) } else { b.center[a].as_f64() })
            })
            .collect();
        let mut kappa = 2.0;
        loop {
            let k = T::lit(kappa);
            if kappa > MAX_KAPPA || (spacing > T::zero() && r / k < spacing) {
                return Err(Error::Porosity(format!(
                    "no hole found in Q({:?}, {}) above the atom spacing",
                    x.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                    r.as_f64()
                )));
            }
            if find_hole(s, &x, r, k).is_some() {
                break;
            }
            kappa *= 2.0;
        }
        if kappa > best.kappa || best.worst_center.is_empty() {
            best.kappa = best.kappa.max(kappa);
            best.worst_center = x.iter().map(|v| v.as_f64()).collect();
            best.worst_radius = r.as_f64();
        }
    }
    Ok(best)
}

/// Assignment `Q ↦ r(Q)` of small dyadic cubes away from `S`.
#[derive(Clone, Debug, Serialize)]
pub struct PorousSelection {
    pub kappa: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub r0: u32,
    /// `(Q, r(Q))` in the family's order.
    pub assignment: Vec<(DyadicCube, DyadicCube)>,
}

/// `σ = (1+γ)·16κ`.
pub fn porosity_sigma(gamma: f64, kappa: f64) -> f64 {
    (1.0 + gamma) * 16.0 * kappa
}

/// Smallest `r0` with `σ² < 2^{r0}`.
pub fn residue_modulus(sigma: f64) -> u32 {
    let mut r0 = 0u32;
    while 2f64.powi(r0 as i32) <= sigma * sigma {
        r0 += 1;
    }
    r0
}

/// For each `Q` finds a hole point `y ∈ Q(x_Q, r_Q/2)` with
/// `Q(y, r_Q/2κ) ∩ S = ∅` and takes `r(Q)` as the dyadic cube containing `y`
/// with `r_Q/8κ < ℓ(r(Q)) ≤ r_Q/4κ` (lowest index on shared faces).
pub fn porous_selection<T: Real>(family: &NearSetFamily, s: &DSet<T>, kappa: f64) -> Result<PorousSelection> {
    if !(kappa >= 1.0) {
        return Err(Error::Parameter("kappa must be at least 1".into()));
    }
    let sigma = porosity_sigma(family.gamma, kappa);
    let shift = (8.0 * kappa).log2().ceil() as i32;
    let k = T::lit(kappa);
    let mut assignment = Vec::with_capacity(family.cubes.len());
    for q in &family.cubes {
        if q.side::<T>() > T::one() {
            return Err(Error::Parameter("family cubes must have side at most 1".into()));
        }
        let c = q.center::<T>();
        let r_q = q.side::<T>() / T::lit(2.0);
        let y = find_hole(s, &c, r_q / T::lit(2.0), k).ok_or_else(|| {
            Error::Porosity(format!("no hole of half-side r_Q/2κ in cube {:?} at level {}", q.coords.as_slice(), q.level))
        })?;
        assignment.push((q.clone(), DyadicCube::containing(q.level + shift, &y)));
    }
    Ok(PorousSelection { kappa, gamma: family.gamma, sigma, r0: residue_modulus(sigma), assignment })
}

/// Per-cube failures of the selection properties.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SelectionAudit {
    pub size: Vec<usize>,
    pub interior: Vec<usize>,
    pub distance: Vec<usize>,
}

impl SelectionAudit {
    pub fn is_clean(&self) -> bool {
        self.size.is_empty() && self.interior.is_empty() && self.distance.is_empty()
    }
}

impl PorousSelection {
    /// Checks `ℓ(Q) ≤ σ ℓ(r(Q))`, `r(Q) ⊂ int Q` (exact) and
    /// `ℓ(Q)/σ ≤ dist(·,S) ≤ σ ℓ(Q)` on `r(Q)`.
    pub fn audit<T: Real>(&self, s: &DSet<T>) -> SelectionAudit {
        let sigma = T::lit(self.sigma);
        let mut out = SelectionAudit::default();
        for (i, (q, rq)) in self.assignment.iter().enumerate() {
            let lq = q.side::<T>();
            let lr = rq.side::<T>();
            if lq > sigma * lr {
                out.size.push(i);
            }
            if !rq.inside_interior_of(q) {
                out.interior.push(i);
            }
            let near_ok = dist_at_least(s, rq, lq / sigma);
            // Every point of r(Q) is within dist(center) + half-side of S.
            let far_ok = dist_at_most(s, rq, sigma * lq - lr);
            if !(near_ok && far_ok) {
                out.distance.push(i);
            }
        }
        out
    }

    /// Residue class of `Q` used by the disjointness check.
    pub fn residue(&self, q: &DyadicCube) -> u32 {
        q.level.rem_euclid(self.r0 as i32) as u32
    }

    /// Pairs `(a, b)` of assignment indices in one residue class whose
    /// closed cubes `r(Q)` intersect, found with a sweep along axis 0.
    pub fn disjointness_violations(&self) -> Vec<(usize, usize)> {
        let finest = self.assignment.iter().map(|(_, r)| r.level).max().unwrap_or(0);
        let mut out = Vec::new();
        for class in 0..self.r0 {
            let mut items: Vec<(i128, i128, usize)> = self
                .assignment
                .iter()
                .enumerate()
                .filter(|(_, (q, _))| self.residue(q) == class)
                .map(|(i, (_, r))| {
                    let sh = finest - r.level;
                    let lo = (r.coords[0] as i128) << sh;
                    (lo, lo + (1i128 << sh), i)
                })
                .collect();
            items.sort();
            let mut active: Vec<(i128, usize)> = Vec::new();
            for (lo, hi, i) in items {
                active.retain(|&(end, _)| end >= lo);
                for &(_, j) in &active {
                    if self.assignment[i].1.closed_intersect(&self.assignment[j].1) {
                        out.push((j.min(i), j.max(i)));
                    }
                }
                active.push((hi, i));
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dset::{build_dset, IfsSpec};

    #[test]
    fn residue_modulus_is_strict() {
        assert_eq!(residue_modulus(4.0), 5);
        assert_eq!(residue_modulus(3.0), 4);
        let sigma = porosity_sigma(1.0, 2.0);
        assert_eq!(sigma, 64.0);
        assert_eq!(residue_modulus(sigma), 13);
    }

    #[test]
    fn zero_distance_cube_is_in_family() {
        let s = build_dset::<f64>(&IfsSpec::four_corner(3)).unwrap();
        let fam = near_set_family(&s, 0.01, 2).unwrap();
        // [0, 1/4]^2 has centre (1/8, 1/8); the atom at the origin is 1/8 away.
        assert!(!fam.cubes.contains(&DyadicCube::new(2, &[0, 0])));
        let fam = near_set_family(&s, 0.5, 2).unwrap();
        assert!(fam.cubes.contains(&DyadicCube::new(2, &[0, 0])));
    }

    #[test]
    fn single_atom_needs_smallest_kappa() {
        let s = DSet::from_atoms(2, vec![0.5, 0.5], None, 1.5, None).unwrap();
        let est = estimate_porosity(&s, 50, 4).unwrap();
        assert_eq!(est.kappa, 2.0);
    }

    #[test]
    fn full_grid_is_not_porous() {
        let m = 16;
        let atoms: Vec<f64> = (0..=m).flat_map(|i| (0..=m).flat_map(move |j| [i as f64 / m as f64, j as f64 / m as f64])).collect();
        let s = DSet::from_atoms(2, atoms, None, 2.0, None).unwrap();
        assert!(matches!(estimate_porosity(&s, 20, 1), Err(Error::Porosity(_))));
    }

    #[test]
    fn single_cube_selection() {
        let s = build_dset::<f64>(&IfsSpec::four_corner(4)).unwrap();
        let fam = NearSetFamily { gamma: 1.0, max_level: 1, cubes: vec![DyadicCube::new(1, &[0, 0])] };
        let sel = porous_selection(&fam, &s, 4.0).unwrap();
        assert!(sel.audit(&s).is_clean());
        assert!(sel.disjointness_violations().is_empty());
    }
}
