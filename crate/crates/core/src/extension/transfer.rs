use std::collections::HashMap;

use serde_json::json;

use crate::approx::{CheckReport, Gathered, PolySpace, best_approx_sample};
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::{build_covers, build_shells, CoverFamily, Cube, DyadicCube, Shell, MIN_COVER_LEVEL};
use crate::norms::grid_cube_approx;
use crate::scalar::{trial_rng, Real};

use super::extend::ExtensionField;

/// Scale factor of the near-set family used by the local transfer estimates.
pub const TRANSFER_GAMMA: f64 = 320.0;

fn set_approx<T: Real>(s: &DSet<T>, f: &[T], q: &Cube<T>, k: usize, u: u32) -> Result<T> {
    let idx = s.atoms_in(q);
    if idx.is_empty() {
        return Ok(T::zero());
    }
    let g = Gathered::from_indices(s.n(), s.atoms(), s.weights(), f, &idx);
    Ok(best_approx_sample(&g.sample(s.n()), PolySpace::for_approx(k, q.center.clone(), q.side()), u)?.value)
}

fn ratio_of(num: f64, den: f64, tol: f64) -> Option<f64> {
    if den <= tol {
        None
    } else {
        Some(num / den)
    }
}

#[derive(Default)]
struct Side {
    max: Option<f64>,
    witness: Option<serde_json::Value>,
    count: usize,
    vacuous: usize,
    violations: usize,
}

impl Side {
    fn record(&mut self, num: f64, den: f64, tol: f64, x: &[f64]) {
        self.count += 1;
        match ratio_of(num, den, tol) {
            Some(r) => {
                if self.max.is_none_or(|m| r > m) {
                    self.max = Some(r);
                    self.witness = Some(json!({"x": x, "lhs": num, "rhs": den, "ratio": r}));
                }
            }
            None if num <= tol => self.vacuous += 1,
            None => self.violations += 1,
        }
    }

    fn json(&self) -> serde_json::Value {
        json!({"max_ratio": self.max, "points": self.count, "vacuous": self.vacuous, "violations": self.violations})
    }
}

/// Pointwise comparison, at every `stride`-th grid point, of the local
/// approximation of `f̃ = Ext f` at level `j` with the data of `f` on `S`:
/// the cube transfer `ℰ(f̃, Q(x,2^{−j})) ≲ ℰ(f̃, 4Q)`, the near estimate
/// against covers `ℱ_j`, and the far estimate against covers `ℱ_i` restricted
/// to shells `S_i`. Far cubes more than `80·2^{10}` away must have
/// `ℰ(f̃, 4Q) = 0`; nonzero values are counted as violations.
#[allow(clippy::too_many_arguments)]
pub fn local_transfer_check<T: Real>(field: &ExtensionField<T>, s: &DSet<T>, f: &[T], k: usize, u: u32, j: i32, stride: usize, inner_max: usize) -> Result<CheckReport> {
    if j < 0 {
        return Err(Error::Parameter("local transfer level j must be ≥ 0".into()));
    }
    let grid = &field.grid;
    let delta = field.delta;
    let region = grid.region();
    let tol = 1e-9 * f.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs())).max(1e-300);
    let covers: HashMap<i32, CoverFamily<T>> = (MIN_COVER_LEVEL..=j).map(|i| build_covers(s, i, delta).map(|c| (i, c))).collect::<Result<_>>()?;
    let shells: HashMap<i32, Shell> = build_shells(MIN_COVER_LEVEL, j).into_iter().map(|sh| (sh.level, sh)).collect();
    let mut cover_e: HashMap<(i32, usize, usize), f64> = HashMap::new();
    let mut cube_e: HashMap<DyadicCube, Option<f64>> = HashMap::new();
    let (mut cubetrans, mut eest, mut test) = (Side::default(), Side::default(), Side::default());
    let mut whatis_nonzero = 0usize;
    let side_j = T::exp2i(-j);
    let step = stride.max(1);
    for i in (0..grid.len()).step_by(step) {
        let x = grid.point(i);
        let xf: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let q = DyadicCube::containing(j, &x);
        let e4 = match cube_e.get(&q) {
            Some(v) => *v,
            None => {
                let c4 = q.to_cube::<T>().scaled(T::lit(4.0));
                let v = if region.contains_cube(&c4) { grid_cube_approx(grid, &field.values, &c4, k, u, inner_max)?.map(|r| r.0.as_f64()) } else { None };
                cube_e.insert(q.clone(), v);
                v
            }
        };
        let Some(e4) = e4 else { continue };
        let small = Cube { center: x.clone(), half_side: side_j };
        if let Some((e, _)) = grid_cube_approx(grid, &field.values, &small, k, u, inner_max)? {
            cubetrans.record(e.as_f64(), e4, tol, &xf);
        }
        let dist = s.dist_to_set(&q.center::<T>()).as_f64();
        let lq = side_j.as_f64();
        let rhs_near = |level: i32, kk: usize, cover_e: &mut HashMap<(i32, usize, usize), f64>, restrict: Option<&Shell>| -> Result<f64> {
            let cov = &covers[&level];
            let mut acc = 0.0;
            for c in cov.doubled_containing(&x) {
                if let Some(sh) = restrict {
                    if !sh.contains(s.dist_to_set(&x)) {
                        continue;
                    }
                }
                let key = (level, kk, c);
                let e = match cover_e.get(&key) {
                    Some(e) => *e,
                    None => {
                        let e = set_approx(s, f, &cov.cubes[c].scaled(T::lit(2.0)), kk, u)?.as_f64();
                        cover_e.insert(key, e);
                        e
                    }
                };
                acc += e;
            }
            Ok(acc)
        };
        if dist <= TRANSFER_GAMMA * lq {
            let r = rhs_near(j, k, &mut cover_e, None)?;
            eest.record(e4, r, tol, &xf);
        } else {
            // 320·2^{−i−1} < dist ≤ 320·2^{−i}
            let i_far = (TRANSFER_GAMMA / dist).log2().floor() as i32;
            if i_far < MIN_COVER_LEVEL {
                if e4 > tol {
                    whatis_nonzero += 1;
                }
                continue;
            }
            let mut r = 0.0;
            for lv in MIN_COVER_LEVEL..j {
                let kk = if lv >= 0 { k } else { 0 };
                r += 2f64.powi(k as i32 * (lv - j)) * rhs_near(lv, kk, &mut cover_e, Some(&shells[&lv]))?;
            }
            test.record(e4, r, tol, &xf);
        }
    }
    let max_ratio = [cubetrans.max, eest.max, test.max].into_iter().flatten().reduce(f64::max);
    let witnesses = [("cubetrans", &cubetrans), ("eest", &eest), ("test", &test)]
        .into_iter()
        .filter_map(|(name, side)| side.witness.clone().map(|w| json!({"inequality": name, "witness": w})))
        .collect();
    Ok(CheckReport {
        check: "local_transfer".into(),
        params: json!({
            "k": k, "u": u, "j": j, "delta": delta.as_f64(), "stride": step, "inner_max": inner_max,
            "cubetrans": cubetrans.json(), "eest": eest.json(), "test": test.json(),
            "whatis_nonzero": whatis_nonzero,
        }),
        max_ratio,
        witnesses,
    })
}

/// Sampled ratios `ℰ_k(f̃, Q(x,t)) / ( t^k/(t^k + dist(x,S)^k) · ℰ(f, K) )`
/// with `K = Q(a_x, 50·max(80t, dist(x,S)))`, using `ℰ_k` on `S` when the
/// radius of `K` is at most `Δ` and `ℰ_0` otherwise.
#[allow(clippy::too_many_arguments)]
pub fn damping_check<T: Real>(field: &ExtensionField<T>, s: &DSet<T>, f: &[T], k: usize, u: u32, ts: &[f64], samples: usize, seed: u64, inner_max: usize) -> Result<CheckReport> {
    use rand::Rng;
    let grid = &field.grid;
    let region = grid.region();
    let delta = field.delta.as_f64();
    let tol = 1e-9 * f.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs())).max(1e-300);
    let mut side = Side::default();
    let mut skipped = 0usize;
    let mut memo: HashMap<(usize, u64, usize), f64> = HashMap::new();
    for trial in 0..samples as u64 {
        let mut rng = trial_rng(seed, trial);
        let i = rng.gen_range(0..grid.len());
        let x = grid.point(i);
        let (a, dist) = s.nearest(&x);
        for &t in ts {
            let q = Cube { center: x.clone(), half_side: T::lit(t) };
            if !region.contains_cube(&q) || T::lit(t) < grid.step {
                skipped += 1;
                continue;
            }
            let Some((lhs, _)) = grid_cube_approx(grid, &field.values, &q, k, u, inner_max)? else {
                skipped += 1;
                continue;
            };
            let d = dist.as_f64();
            let r = 50.0 * (80.0 * t).max(d);
            let kk = if r <= delta { k } else { 0 };
            let key = (a, r.to_bits(), kk);
            let e = match memo.get(&key) {
                Some(e) => *e,
                None => {
                    let e = set_approx(s, f, &Cube { center: s.atom(a).to_vec(), half_side: T::lit(r) }, kk, u)?.as_f64();
                    memo.insert(key, e);
                    e
                }
            };
            let damp = t.powi(k as i32) / (t.powi(k as i32) + d.powi(k as i32));
            let xf: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
            side.record(lhs.as_f64(), damp * e, tol, &xf);
        }
    }
    Ok(CheckReport {
        check: "damping".into(),
        params: json!({"k": k, "u": u, "ts": ts, "samples": samples, "seed": seed, "delta": delta, "skipped": skipped, "summary": side.json()}),
        max_ratio: side.max,
        witnesses: side.witness.into_iter().collect(),
    })
}
