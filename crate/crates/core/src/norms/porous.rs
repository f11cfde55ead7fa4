use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DyadicCube, NearSetFamily, PorousSelection};
use crate::scalar::{CompensatedSum, Real};

/// `∫ (Σ_Q b_Q χ_Q)^s dx` computed exactly over the dyadic refinement
/// generated by the cubes (the integrand is constant on its leaves).
/// Repeated cubes add up.
pub fn dyadic_power_integral<T: Real>(terms: &[(DyadicCube, T)], s: f64) -> T {
    if terms.is_empty() {
        return T::zero();
    }
    let mut coef: HashMap<DyadicCube, T> = HashMap::new();
    for (q, b) in terms {
        *coef.entry(q.clone()).or_insert(T::zero()) += *b;
    }
    let top = coef.keys().map(|q| q.level).min().expect("non-empty");
    // Every ancestor of a term down to the top level.
    let mut tree: HashSet<DyadicCube> = HashSet::new();
    for q in coef.keys() {
        let mut c = q.clone();
        while tree.insert(c.clone()) && c.level > top {
            c = c.parent();
        }
    }
    let mut roots: Vec<&DyadicCube> = tree.iter().filter(|c| c.level == top).collect();
    roots.sort();
    let s = T::lit(s);
    let mut acc = CompensatedSum::new();
    for r in roots {
        integrate(r, coef.get(r).copied().unwrap_or(T::zero()), &coef, &tree, s, &mut acc);
    }
    acc.value()
}

fn integrate<T: Real>(c: &DyadicCube, value: T, coef: &HashMap<DyadicCube, T>, tree: &HashSet<DyadicCube>, s: T, acc: &mut CompensatedSum<T>) {
    let kids = c.children();
    if !kids.iter().any(|k| tree.contains(k)) {
        acc.add(c.volume::<T>() * value.powf(s));
        return;
    }
    for k in &kids {
        if tree.contains(k) {
            integrate(k, value + coef.get(k).copied().unwrap_or(T::zero()), coef, tree, s, acc);
        } else {
            acc.add(k.volume::<T>() * value.powf(s));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SummationResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when both sides vanish.
    pub ratio: Option<f64>,
}

impl SummationResult {
    fn of(lhs: f64, rhs: f64) -> Self {
        let ratio = if rhs > 0.0 { Some(lhs / rhs) } else if lhs > 0.0 { Some(f64::INFINITY) } else { None };
        Self { lhs, rhs, ratio }
    }
}

fn check_exponents(p: f64, q: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite() && q > 1.0 && q.is_finite()) {
        return Err(Error::Parameter(format!("p and q must lie in (1, ∞), got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `‖Σ χ_Q a_Q‖_p` against `‖(Σ (χ_Q a_Q)^q)^{1/q}‖_p` over a near-set family;
/// `a` is aligned with `family.cubes`.
pub fn porous_summation_check<T: Real>(family: &NearSetFamily, a: &[T], p: f64, q: f64) -> Result<SummationResult> {
    check_exponents(p, q)?;
    if a.len() != family.cubes.len() {
        return Err(Error::Parameter(format!("{} coefficients for {} cubes", a.len(), family.cubes.len())));
    }
    if a.iter().any(|x| !(*x >= T::zero())) {
        return Err(Error::Parameter("coefficients must be nonnegative".into()));
    }
    let lin: Vec<(DyadicCube, T)> = family.cubes.iter().cloned().zip(a.iter().copied()).collect();
    let pow: Vec<(DyadicCube, T)> = family.cubes.iter().cloned().zip(a.iter().map(|x| x.powf(T::lit(q)))).collect();
    let lhs = dyadic_power_integral(&lin, p).as_f64().powf(1.0 / p);
    let rhs = dyadic_power_integral(&pow, p / q).as_f64().powf(1.0 / p);
    Ok(SummationResult::of(lhs, rhs))
}

/// `‖Σ χ_Q a_Q‖_p` against `‖Σ χ_{r(Q)} a_Q‖_p` for a porous selection;
/// `a` is aligned with `selection.assignment`.
pub fn separated_summation_check<T: Real>(selection: &PorousSelection, a: &[T], p: f64) -> Result<SummationResult> {
    check_exponents(p, 2.0)?;
    if a.len() != selection.assignment.len() {
        return Err(Error::Parameter(format!("{} coefficients for {} cubes", a.len(), selection.assignment.len())));
    }
    let on_q: Vec<(DyadicCube, T)> = selection.assignment.iter().map(|x| x.0.clone()).zip(a.iter().copied()).collect();
    let on_r: Vec<(DyadicCube, T)> = selection.assignment.iter().map(|x| x.1.clone()).zip(a.iter().copied()).collect();
    let lhs = dyadic_power_integral(&on_q, p).as_f64().powf(1.0 / p);
    let rhs = dyadic_power_integral(&on_r, p).as_f64().powf(1.0 / p);
    Ok(SummationResult::of(lhs, rhs))
}

/// Coefficients `2^{jn/p}` on the family cubes containing `x` (one per level,
/// a nested tower), zero elsewhere.
pub fn tower_coefficients<T: Real>(family: &NearSetFamily, x: &[T], p: f64) -> Vec<T> {
    let n = x.len() as f64;
    family.cubes.iter().map(|c| if c.contains_point(x) { T::lit((c.level as f64 * n / p).exp2()) } else { T::zero() }).collect()
}
