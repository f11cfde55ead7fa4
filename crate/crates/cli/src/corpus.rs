//! Test functions defined on all of ℝⁿ, so one corpus can be sampled on
//! sets of different depths.

use besov_trace::approx::multi_indices;
use besov_trace::{trial_rng, DSet};
use rand::Rng;
use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum TestFn {
    Constant(f64),
    /// `Σ c_ν x^ν` over multi-indices of degree at most `degree`.
    Poly { degree: i32, coeffs: Vec<f64> },
    /// `max(0, 1 − |x − c|_∞ / r)`.
    Tent { center: Vec<f64>, radius: f64 },
    /// `Σ_j 2^{−jβ} Σ_m ε ψ(2^j (x − c))` with `ψ(y) = Π (1 − y_a²)²₊`.
    Bumps { beta: f64, terms: Vec<(i32, Vec<f64>, f64)> },
    /// `Σ a cos(2π ω·x + φ)`.
    Cosine { terms: Vec<(Vec<f64>, f64, f64)> },
}

fn bump(y: &[f64]) -> f64 {
    y.iter().map(|v| (1.0 - v * v).max(0.0).powi(2)).product()
}

impl TestFn {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFn::Constant(c) => *c,
            TestFn::Poly { degree, coeffs } => multi_indices(x.len(), *degree)
                .iter()
                .zip(coeffs)
                .map(|(nu, c)| c * nu.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product::<f64>())
                .sum(),
            TestFn::Tent { center, radius } => {
                let d = center.iter().zip(x).map(|(c, v)| (c - v).abs()).fold(0.0, f64::max);
                (1.0 - d / radius).max(0.0)
            }
            TestFn::Bumps { beta, terms } => terms
                .iter()
                .map(|(j, c, eps)| {
                    let s = (*j as f64).exp2();
                    let y: Vec<f64> = c.iter().zip(x).map(|(c, v)| s * (v - c)).collect();
                    eps * (-(*j as f64) * beta).exp2() * bump(&y)
                })
                .sum(),
            TestFn::Cosine { terms } => terms
                .iter()
                .map(|(w, phi, a)| a * (std::f64::consts::TAU * w.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + phi).cos())
                .sum(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TestFn::Constant(_) => "constant",
            TestFn::Poly { .. } => "poly",
            TestFn::Tent { .. } => "tent",
            TestFn::Bumps { .. } => "bumps",
            TestFn::Cosine { .. } => "cosine",
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            TestFn::Constant(c) => json!({"kind": "constant", "value": c}),
            TestFn::Poly { degree, coeffs } => json!({"kind": "poly", "degree": degree, "coeffs": coeffs}),
            TestFn::Tent { center, radius } => json!({"kind": "tent", "center": center, "radius": radius}),
            TestFn::Bumps { beta, terms } => json!({"kind": "bumps", "beta": beta, "terms": terms.len()}),
            TestFn::Cosine { terms } => json!({"kind": "cosine", "terms": terms}),
        }
    }

    pub fn on_atoms(&self, s: &DSet) -> Vec<f64> {
        (0..s.len()).map(|i| self.eval(s.atom(i))).collect()
    }
}

/// A constant, a polynomial of degree `k − 1` (at least 1), two tents at
/// random atoms of `s` and `size − 4` bump sums with random decay rates.
pub fn standard_corpus(s: &DSet, k: usize, size: usize, seed: u64) -> Vec<TestFn> {
    let n = s.n();
    let mut rng = trial_rng(seed, 0);
    let mut out = vec![TestFn::Constant(1.5)];
    let degree = (k as i32 - 1).max(1);
    let dim = multi_indices(n, degree).len();
    out.push(TestFn::Poly { degree, coeffs: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect() });
    for _ in 0..2 {
        let a = rng.gen_range(0..s.len());
        out.push(TestFn::Tent { center: s.atom(a).to_vec(), radius: rng.gen_range(0.2..0.5) });
    }
    let b = s.bounding();
    while out.len() < size {
        let beta = rng.gen_range(0.5..1.5);
        let mut terms = Vec::new();
        for j in 1..=5 {
            for _ in 0..4 {
                let c: Vec<f64> = (0..n).map(|a| rng.gen_range(b.lower(a)..b.upper(a))).collect();
                terms.push((j, c, if rng.gen_bool(0.5) { 1.0 } else { -1.0 }));
            }
        }
        out.push(TestFn::Bumps { beta, terms });
    }
    out.truncate(size);
    out
}

/// `count` random cosine sums with integer frequencies `|ω_a| ≤ 3`,
/// amplitudes damped by `1/|ω|`.
pub fn cosine_corpus(n: usize, count: usize, seed: u64) -> Vec<TestFn> {
    (0..count as u64)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let terms = (0..4)
                .map(|_| {
                    let w: Vec<f64> = loop {
                        let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
                        if w.iter().any(|v| *v != 0.0) {
                            break w;
                        }
                    };
                    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
                    (w, rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(-1.0..1.0) / norm)
                })
                .collect();
            TestFn::Cosine { terms }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use besov_trace::dset::{build_dset, IfsSpec};

    #[test]
    fn closed_forms() {
        let p = TestFn::Poly { degree: 1, coeffs: vec![1.0, 2.0, 3.0] };
        let i = multi_indices(2, 1);
        let expect: f64 = i.iter().zip([1.0, 2.0, 3.0]).map(|(nu, c)| c * 0.5f64.powi(nu[0] as i32) * 0.25f64.powi(nu[1] as i32)).sum();
        assert_eq!(p.eval(&[0.5, 0.25]), expect);
        let t = TestFn::Tent { center: vec![0.0, 0.0], radius: 0.5 };
        assert_eq!(t.eval(&[0.25, -0.1]), 0.5);
        assert_eq!(t.eval(&[0.6, 0.0]), 0.0);
        let b = TestFn::Bumps { beta: 1.0, terms: vec![(1, vec![0.0, 0.0], -1.0)] };
        assert_eq!(b.eval(&[0.0, 0.0]), -0.5);
        assert_eq!(b.eval(&[0.5, 0.0]), 0.0);
        let c = TestFn::Cosine { terms: vec![(vec![1.0, 0.0], 0.0, 2.0)] };
        assert!((c.eval(&[0.5, 7.0]) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn corpus_is_deterministic_and_nested_atoms_agree() {
        let s5: DSet = build_dset(&IfsSpec::four_corner(5)).unwrap();
        let s6: DSet = build_dset(&IfsSpec::four_corner(6)).unwrap();
        let a = standard_corpus(&s5, 2, 8, 3);
        assert_eq!(a, standard_corpus(&s5, 2, 8, 3));
        assert_eq!(a.len(), 8);
        // Depth-5 atoms are depth-6 atoms, so tent centres stay on the set.
        for f in &a {
            if let TestFn::Tent { center, .. } = f {
                assert_eq!(s6.dist_to_set(center), 0.0);
            }
        }
        assert_eq!(cosine_corpus(2, 20, 1), cosine_corpus(2, 20, 1));
    }
}
