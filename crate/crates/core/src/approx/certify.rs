use std::io::Write;
use std::path::Path;

use gauss_quad::GaussLegendre;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::scalar::{csum, trial_rng, Real};

use super::best::{best_approx_on_set, ApproxResult};
use super::poly::PolySpace;
use super::projection::build_projection;

/// Values at or below this are treated as zero in ratio checks.
pub const ZERO_TOL: f64 = 1e-10;
/// A random polynomial is skipped when its atomic norm falls below this
/// fraction of its largest coefficient.
pub const UNDERFLOW_TOL: f64 = 1e-12;
pub const QUAD_START: usize = 32;
pub const QUAD_MAX: usize = 1024;
pub const QUAD_RTOL: f64 = 1e-6;
const KEEP_WITNESSES: usize = 3;

/// Exponents accepted by the polynomial inequality checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exponent {
    One,
    Two,
    Inf,
}

impl Exponent {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Self::One),
            "2" => Ok(Self::Two),
            "inf" | "infinity" | "∞" => Ok(Self::Inf),
            other => Err(Error::Parameter(format!("exponent must be 1, 2 or inf, got {other}"))),
        }
    }

    fn json(self) -> Value {
        match self {
            Self::One => json!(1),
            Self::Two => json!(2),
            Self::Inf => json!("inf"),
        }
    }

    /// Normalized mean `(Σ w|v|^e / Σ w)^{1/e}`, or the max for `Inf`.
    pub fn mean<T: Real>(self, values: &[T], weights: &[T]) -> T {
        match self {
            Self::Inf => values.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            Self::One => csum(values.iter().zip(weights).map(|(v, &w)| w * v.abs())) / csum(weights.iter().copied()),
            Self::Two => (csum(values.iter().zip(weights).map(|(&v, &w)| w * v * v)) / csum(weights.iter().copied())).sqrt(),
        }
    }
}

/// One JSON-lines record of a certifier run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: Value,
    /// `None` when every trial was vacuous or skipped.
    pub max_ratio: Option<f64>,
    pub witnesses: Vec<Value>,
}

impl CheckReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn write_reports_jsonl(path: &Path, reports: &[CheckReport], append: bool) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).write(true).append(append).truncate(!append).open(path)?;
    for r in reports {
        writeln!(f, "{}", r.to_json_line())?;
    }
    Ok(())
}

/// Result of a single `numerator / denominator` comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckOutcome {
    Ratio { value: f64 },
    /// Both sides vanish.
    Vacuous,
    /// Denominator vanishes while the numerator does not.
    Violation { numerator: f64 },
}

impl CheckOutcome {
    fn of(num: f64, den: f64, tol: f64) -> Self {
        if den <= tol {
            if num <= tol {
                Self::Vacuous
            } else {
                Self::Violation { numerator: num }
            }
        } else {
            Self::Ratio { value: num / den }
        }
    }

    pub fn ratio(&self) -> Option<f64> {
        match self {
            Self::Ratio { value } => Some(*value),
            _ => None,
        }
    }
}

fn cube_json<T: Real>(q: &Cube<T>) -> Value {
    json!({"center": q.center.iter().map(|c| c.as_f64()).collect::<Vec<_>>(), "half_side": q.half_side.as_f64()})
}

/// Keeps the largest ratios, ties broken by earlier trial.
#[derive(Default)]
struct Tracker {
    max: Option<f64>,
    top: Vec<(f64, u64, Value)>,
}

impl Tracker {
    fn push(&mut self, ratio: f64, trial: u64, w: Value) {
        self.max = Some(self.max.map_or(ratio, |m| m.max(ratio)));
        self.top.push((ratio, trial, w));
        self.top.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        self.top.truncate(KEEP_WITNESSES);
    }

    fn witnesses(self) -> Vec<Value> {
        self.top.into_iter().map(|t| t.2).collect()
    }
}

fn random_coeffs<T: Real>(dim: usize, seed: u64, trial: u64) -> Vec<T> {
    let mut rng = trial_rng(seed, trial);
    (0..dim).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect()
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn lattice_stat<T: Real>(space: &PolySpace<T>, coeffs: &[T], q: &Cube<T>, e: Exponent, m: usize) -> T {
    // Midpoints for integrals, endpoints included for the maximum.
    let n = space.n;
    let st = space.degree.max(0) as usize + 1;
    let pts = if e == Exponent::Inf { m + 1 } else { m };
    let tables: Vec<Vec<T>> = (0..n)
        .map(|a| {
            let mut t = Vec::with_capacity(pts * st);
            for i in 0..pts {
                let off = if e == Exponent::Inf { T::from_usize_lossy(i) } else { T::from_usize_lossy(i) + T::lit(0.5) };
                let x = q.lower(a) + q.side() * off / T::from_usize_lossy(m);
                let tt = (x - space.center[a]) / space.scale;
                let mut v = T::one();
                for _ in 0..st {
                    t.push(v);
                    v *= tt;
                }
            }
            t
        })
        .collect();
    let mut idx = vec![0usize; n];
    let mut acc = T::zero();
    let mut sum = crate::scalar::CompensatedSum::new();
    loop {
        let mut v = T::zero();
        for (c, nu) in coeffs.iter().zip(&space.indices) {
            let mut term = *c;
            for a in 0..n {
                term *= tables[a][idx[a] * st + nu[a] as usize];
            }
            v += term;
        }
        match e {
            Exponent::Inf => acc = acc.max(v.abs()),
            Exponent::One => sum.add(v.abs()),
            Exponent::Two => sum.add(v * v),
        }
        let mut a = 0;
        loop {
            if a == n {
                let count = T::from_usize_lossy(pts.pow(n as u32));
                return match e {
                    Exponent::Inf => acc,
                    Exponent::One => sum.value() / count,
                    Exponent::Two => (sum.value() / count).sqrt(),
                };
            }
            idx[a] += 1;
            if idx[a] < pts {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// `(⨍_Q p²)^{1/2}` by a tensor Gauss–Legendre rule with `deg + 1` nodes per
/// axis, exact for `p²`.
fn gauss_l2<T: Real>(space: &PolySpace<T>, coeffs: &[T], q: &Cube<T>) -> T {
    let n = space.n;
    let nodes = space.degree.max(0) as usize + 1;
    let rule = GaussLegendre::new(nodes.try_into().expect("at least one node"));
    let pts: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w / 2.0)).collect();
    let mut idx = vec![0usize; n];
    let mut x = vec![T::zero(); n];
    let mut sum = crate::scalar::CompensatedSum::new();
    loop {
        let mut w = T::one();
        for a in 0..n {
            let (t, wa) = pts[idx[a]];
            x[a] = q.center[a] + q.half_side * T::lit(t);
            w *= T::lit(wa);
        }
        let v = space.eval(coeffs, &x);
        sum.add(w * v * v);
        let mut a = 0;
        loop {
            if a == n {
                return sum.value().max(T::zero()).sqrt();
            }
            idx[a] += 1;
            if idx[a] < pts.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Normalized Lebesgue `L^e(Q)` size of a polynomial. `L²` is exact; `L¹`
/// and the maximum refine a lattice ×2 until the relative change is below
/// `QUAD_RTOL`.
pub fn lebesgue_mean<T: Real>(space: &PolySpace<T>, coeffs: &[T], q: &Cube<T>, e: Exponent) -> (T, bool) {
    if e == Exponent::Two {
        return (gauss_l2(space, coeffs, q), true);
    }
    let mut m = QUAD_START;
    let mut prev = lattice_stat(space, coeffs, q, e, m);
    while m * 2 <= QUAD_MAX {
        m *= 2;
        let next = lattice_stat(space, coeffs, q, e, m);
        if (next - prev).abs() <= T::lit(QUAD_RTOL) * next.abs() {
            return (next, true);
        }
        prev = next;
    }
    (prev, false)
}

fn gather<T: Real>(s: &DSet<T>, q: &Cube<T>) -> Result<(Vec<usize>, Vec<T>)> {
    let idx = s.atoms_in(q);
    if idx.is_empty() {
        return Err(Error::EmptySupport);
    }
    let w = idx.iter().map(|&i| s.weight(i)).collect();
    Ok((idx, w))
}

fn atom_values<T: Real>(s: &DSet<T>, space: &PolySpace<T>, coeffs: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| space.eval(coeffs, s.atom(i))).collect()
}

/// Max over random `p ∈ 𝒫_k` of `‖p‖_{L^r(Q), normalized} / ‖p‖_{L^u(Q'∩S), normalized}`.
#[allow(clippy::too_many_arguments)]
pub fn remez_check<T: Real>(s: &DSet<T>, q: &Cube<T>, qp: &Cube<T>, k: usize, u: Exponent, r: Exponent, trials: usize, seed: u64) -> Result<CheckReport> {
    if !q.contains_cube(qp) {
        return Err(Error::Parameter("remez_check needs Q' ⊆ Q".into()));
    }
    let (idx, w) = gather(s, qp)?;
    let space = PolySpace::new(k as i32, q.center.clone(), q.side());
    let mut tr = Tracker::default();
    let (mut skipped, mut unconverged) = (0usize, 0usize);
    for t in 0..trials as u64 {
        let c: Vec<T> = random_coeffs(space.dim(), seed, t);
        let rhs = u.mean(&atom_values(s, &space, &c, &idx), &w);
        if rhs <= T::lit(UNDERFLOW_TOL) * max_abs(&c) {
            skipped += 1;
            continue;
        }
        let (lhs, ok) = lebesgue_mean(&space, &c, q, r);
        unconverged += usize::from(!ok);
        let ratio = (lhs / rhs).as_f64();
        tr.push(ratio, t, json!({"trial": t, "ratio": ratio, "lhs": lhs.as_f64(), "rhs": rhs.as_f64()}));
    }
    Ok(CheckReport {
        check: "remez".into(),
        params: json!({
            "k": k, "u": u.json(), "r": r.json(), "trials": trials, "seed": seed,
            "q": cube_json(q), "qp": cube_json(qp), "support": idx.len(),
            "skipped": skipped, "vacuous": 0, "quadrature_unconverged": unconverged,
        }),
        max_ratio: tr.max,
        witnesses: tr.witnesses(),
    })
}

/// Atomic-measure version: both sides over `Q ∩ S`.
pub fn reverse_holder_check<T: Real>(s: &DSet<T>, q: &Cube<T>, k: usize, u: Exponent, r: Exponent, trials: usize, seed: u64) -> Result<CheckReport> {
    let (idx, w) = gather(s, q)?;
    let space = PolySpace::new(k as i32, q.center.clone(), q.side());
    let mut tr = Tracker::default();
    let mut skipped = 0usize;
    for t in 0..trials as u64 {
        let c: Vec<T> = random_coeffs(space.dim(), seed, t);
        let vals = atom_values(s, &space, &c, &idx);
        let rhs = u.mean(&vals, &w);
        if rhs <= T::lit(UNDERFLOW_TOL) * max_abs(&c) {
            skipped += 1;
            continue;
        }
        let lhs = r.mean(&vals, &w);
        let ratio = (lhs / rhs).as_f64();
        tr.push(ratio, t, json!({"trial": t, "ratio": ratio, "lhs": lhs.as_f64(), "rhs": rhs.as_f64()}));
    }
    Ok(CheckReport {
        check: "reverse_holder".into(),
        params: json!({
            "k": k, "u": u.json(), "r": r.json(), "trials": trials, "seed": seed,
            "q": cube_json(q), "support": idx.len(), "skipped": skipped, "vacuous": 0,
        }),
        max_ratio: tr.max,
        witnesses: tr.witnesses(),
    })
}

/// Max over random `p ∈ 𝒫_k` of `max_{S∩Q}|∇p| · ℓ(Q) / max_{S∩Q}|p|`.
pub fn markov_check<T: Real>(s: &DSet<T>, q: &Cube<T>, k: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    let (idx, _) = gather(s, q)?;
    let space = PolySpace::new(k as i32, q.center.clone(), q.side());
    let mut tr = Tracker::default();
    let mut skipped = 0usize;
    for t in 0..trials as u64 {
        let c: Vec<T> = random_coeffs(space.dim(), seed, t);
        let den = max_abs(&atom_values(s, &space, &c, &idx));
        if den <= T::lit(UNDERFLOW_TOL) * max_abs(&c) {
            skipped += 1;
            continue;
        }
        let grad = idx
            .iter()
            .map(|&i| space.gradient(&c, s.atom(i)).iter().map(|g| *g * *g).sum::<T>().sqrt())
            .fold(T::zero(), T::max);
        let ratio = (grad * q.side() / den).as_f64();
        tr.push(ratio, t, json!({"trial": t, "ratio": ratio, "max_grad": grad.as_f64(), "max_abs": den.as_f64()}));
    }
    Ok(CheckReport {
        check: "markov".into(),
        params: json!({"k": k, "trials": trials, "seed": seed, "q": cube_json(q), "support": idx.len(), "skipped": skipped, "vacuous": 0}),
        max_ratio: tr.max,
        witnesses: tr.witnesses(),
    })
}

/// Points on the segment `y = 1/2` inside the unit square, tested against
/// `p = (y − 1/2) + δ`: the atomic side is `δ` while the Lebesgue side stays
/// of order one, so the ratio must grow like `1/δ`. Reports whether the
/// blow-up was observed.
pub fn remez_line_degeneracy(deltas: &[f64], atoms_per_line: usize) -> Result<CheckReport> {
    let m = atoms_per_line.max(2);
    let atoms: Vec<f64> = (0..m).flat_map(|i| [i as f64 / (m - 1) as f64, 0.5]).collect();
    let s = DSet::from_atoms(2, atoms, None, 1.0, None)?;
    let q = Cube::new(vec![0.5, 0.5], 0.5)?;
    let (idx, w) = gather(&s, &q)?;
    let space = PolySpace::new(1, q.center.clone(), q.side());
    let mut ratios = Vec::with_capacity(deltas.len());
    let mut witnesses = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        // Basis order is 1, (x−½), (y−½); coefficients in units of ℓ(Q) = 1.
        let c = [delta, 0.0, 1.0];
        let rhs = Exponent::One.mean(&atom_values(&s, &space, &c, &idx), &w);
        let (lhs, _) = lebesgue_mean(&space, &c, &q, Exponent::Two);
        let ratio = lhs / rhs;
        ratios.push(ratio);
        witnesses.push(json!({"delta": delta, "ratio": ratio, "lhs": lhs, "rhs": rhs}));
    }
    let growing = ratios.windows(2).all(|p| p[1] > p[0]);
    let blow_up = growing && ratios.len() >= 2 && ratios[ratios.len() - 1] / ratios[0] >= 0.1 * deltas[0] / deltas[deltas.len() - 1];
    Ok(CheckReport {
        check: "remez_degenerate".into(),
        params: json!({"deltas": deltas, "atoms": m, "k": 1, "u": 1, "r": 2, "expected_failure": true, "blow_up_observed": blow_up}),
        max_ratio: ratios.iter().copied().reduce(f64::max),
        witnesses,
    })
}

/// `E1 / ((r2/r1)^{d/u} E2)` for nested cubes `Q1 ⊆ Q2`.
pub fn monotonicity_factor<T: Real>(e1: &ApproxResult<T>, q1: &Cube<T>, e2: &ApproxResult<T>, q2: &Cube<T>, d: f64) -> Result<CheckOutcome> {
    let scale = (q2.half_side / q1.half_side).as_f64().powf(d / e1.u as f64);
    let (a, b) = (e1.value.as_f64(), e2.value.as_f64());
    match CheckOutcome::of(a, scale * b, ZERO_TOL) {
        CheckOutcome::Violation { .. } => Err(Error::Inconsistent(format!("E on the larger cube is 0 while E on the smaller cube is {a}"))),
        o => Ok(o),
    }
}

/// `‖f − P_{k,Q} f‖_{L^u(Q∩S)} / ℰ_{k+1}(f, Q)_{L^u(S)}`, both normalized.
pub fn near_best_check<T: Real>(s: &DSet<T>, q: &Cube<T>, k: usize, u: u32, f: &[T]) -> Result<CheckOutcome> {
    let (proj, idx) = build_projection(s, q, k)?;
    let vals: Vec<T> = idx.iter().map(|&i| f[i]).collect();
    let num = proj.residual_norm(&vals, u).as_f64();
    let den = best_approx_on_set(s, f, q, k + 1, u)?.value.as_f64();
    let tol = ZERO_TOL.max(1e-9 * max_abs(&vals).as_f64());
    Ok(CheckOutcome::of(num, den, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_mean_of_linear() {
        // p = x on [0,1]: L² mean sqrt(1/3), L¹ mean 1/2, max 1.
        let q = Cube::new(vec![0.5], 0.5).unwrap();
        let sp = PolySpace::new(1, vec![0.0], 1.0);
        let c = [0.0, 1.0];
        let (l2, ok) = lebesgue_mean(&sp, &c, &q, Exponent::Two);
        assert!(ok && (l2 - (1.0f64 / 3.0).sqrt()).abs() < 1e-5);
        assert!((lebesgue_mean(&sp, &c, &q, Exponent::One).0 - 0.5).abs() < 1e-9);
        assert_eq!(lebesgue_mean(&sp, &c, &q, Exponent::Inf).0, 1.0);
    }

    #[test]
    fn exact_l2_matches_fine_lattice() {
        let q = Cube::new(vec![0.3, -0.2], 0.7).unwrap();
        let sp = PolySpace::new(3, vec![0.1, 0.0], 1.4);
        let c: Vec<f64> = random_coeffs(sp.dim(), 4, 0);
        let exact = lebesgue_mean(&sp, &c, &q, Exponent::Two).0;
        let lattice = lattice_stat(&sp, &c, &q, Exponent::Two, 1024);
        assert!((exact - lattice).abs() < 1e-6 * exact, "{exact} vs {lattice}");
    }

    #[test]
    fn constant_polynomial_has_ratio_one() {
        let atoms = vec![0.1, 0.2, 0.5, 0.5, 0.9, 0.7];
        let s = DSet::from_atoms(2, atoms, None, 1.5, None).unwrap();
        let q = Cube::new(vec![0.5, 0.5], 0.5).unwrap();
        let rep = remez_check(&s, &q, &q, 0, Exponent::One, Exponent::Two, 5, 1).unwrap();
        assert!((rep.max_ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_line_blows_up() {
        let deltas: Vec<f64> = (1..=6).map(|e| 10f64.powi(-e)).collect();
        let rep = remez_line_degeneracy(&deltas, 33).unwrap();
        assert_eq!(rep.params["blow_up_observed"], json!(true));
    }
}
