use besov_trace::approx::{
    best_approx, best_approx_on_set, build_projection, markov_check, monotonicity_factor, near_best_check, remez_line_degeneracy,
    CheckOutcome, PolySpace, Sample,
};
use besov_trace::dset::{build_dset, IfsSpec};
use besov_trace::{trial_rng, Cube, DSet};
use proptest::prelude::*;
use rand::Rng;

fn cantor(depth: u32) -> DSet {
    build_dset(&IfsSpec::four_corner(depth)).unwrap()
}

fn cube_at_atom(s: &DSet, i: usize, r: f64) -> Cube {
    Cube::new(s.atom(i).to_vec(), r).unwrap()
}

fn random_f(s: &DSet, seed: u64) -> Vec<f64> {
    let mut rng = trial_rng(seed, 0);
    (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

#[test]
fn best_constant_in_l1_is_a_weighted_median() {
    let mut rng = trial_rng(3, 0);
    for _ in 0..50 {
        let pts: Vec<f64> = (0..5).map(|_| rng.gen_range(0.0..1.0)).collect();
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let sample = Sample { n: 1, points: &pts, weights: &w, values: &v };
        let got = best_approx(&sample, PolySpace::for_approx(1, vec![0.5], 1.0), 1).unwrap().value;
        let total: f64 = w.iter().sum();
        let exhaustive = v
            .iter()
            .map(|&c| v.iter().zip(&w).map(|(f, wi)| wi * (f - c).abs()).sum::<f64>() / total)
            .fold(f64::INFINITY, f64::min);
        assert!((got - exhaustive).abs() < 1e-14, "{got} vs {exhaustive}");
    }
}

#[test]
fn k1_u2_on_atoms_is_the_weighted_standard_deviation() {
    let s = cantor(4);
    let f = random_f(&s, 5);
    let q = cube_at_atom(&s, 7, 0.2);
    let idx = s.atoms_in(&q);
    let mass: f64 = idx.iter().map(|&i| s.weight(i)).sum();
    let mean: f64 = idx.iter().map(|&i| s.weight(i) * f[i]).sum::<f64>() / mass;
    let var: f64 = idx.iter().map(|&i| s.weight(i) * (f[i] - mean).powi(2)).sum::<f64>() / mass;
    let got = best_approx_on_set(&s, &f, &q, 1, 2).unwrap().value;
    assert!((got - var.sqrt()).abs() < 1e-13);
}

#[test]
fn k0_gives_the_normalized_norm_of_f() {
    let s = cantor(3);
    let q = cube_at_atom(&s, 0, 0.3);
    for u in [1, 2] {
        assert!((best_approx_on_set(&s, &vec![2.0; s.len()], &q, 0, u).unwrap().value - 2.0).abs() < 1e-14);
    }
}

fn poly_on_atoms(s: &DSet, c: &[f64; 6]) -> Vec<f64> {
    (0..s.len())
        .map(|i| {
            let (x, y) = (s.atom(i)[0], s.atom(i)[1]);
            c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn best_approximation_is_monotone_in_k(seed in 0u64..1000, atom in 0usize..256, r in 0.05f64..0.6, u in 1u32..=2) {
        let s = cantor(4);
        let f = random_f(&s, seed);
        let q = cube_at_atom(&s, atom, r);
        let mut prev = f64::INFINITY;
        for k in 0..=3 {
            let e = best_approx_on_set(&s, &f, &q, k, u).unwrap().value;
            prop_assert!(e <= prev * (1.0 + 1e-9) + 1e-12, "k={k}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn adding_a_polynomial_of_lower_degree_is_invisible(seed in 0u64..1000, atom in 0usize..256, u in 1u32..=2, c in prop::array::uniform6(-2.0f64..2.0)) {
        let s = cantor(4);
        let f = random_f(&s, seed);
        let p = poly_on_atoms(&s, &c);
        let g: Vec<f64> = f.iter().zip(&p).map(|(a, b)| a + b).collect();
        let q = cube_at_atom(&s, atom, 0.35);
        let e1 = best_approx_on_set(&s, &f, &q, 3, u).unwrap().value;
        let e2 = best_approx_on_set(&s, &g, &q, 3, u).unwrap().value;
        prop_assert!((e1 - e2).abs() < 1e-8 * (1.0 + e1), "{e1} vs {e2}");
    }

    #[test]
    fn best_approximation_is_absolutely_homogeneous(seed in 0u64..1000, lambda in -5.0f64..5.0, k in 1usize..=2, u in 1u32..=2) {
        let s = cantor(4);
        let f = random_f(&s, seed);
        let g: Vec<f64> = f.iter().map(|v| lambda * v).collect();
        let q = cube_at_atom(&s, 17, 0.3);
        let e1 = best_approx_on_set(&s, &f, &q, k, u).unwrap().value;
        let e2 = best_approx_on_set(&s, &g, &q, k, u).unwrap().value;
        prop_assert!((e2 - lambda.abs() * e1).abs() < 1e-10 * (1.0 + e2));
    }
}

#[test]
fn projection_fixes_polynomials_and_is_linear() {
    let s = cantor(5);
    let q = cube_at_atom(&s, 100, 0.4);
    for k in 0..=2 {
        let (proj, idx) = build_projection(&s, &q, k).unwrap();
        assert!(proj.gram_error < 1e-10);
        assert!(proj.h_sup.iter().all(|h| h.is_finite()));
        let c = [0.3, -1.0, 2.0, 0.5, -0.25, 1.5];
        let mut c = c;
        if k < 2 {
            c[3..].iter_mut().for_each(|v| *v = 0.0);
        }
        if k < 1 {
            c[1..].iter_mut().for_each(|v| *v = 0.0);
        }
        let p = poly_on_atoms(&s, &c);
        let vals: Vec<f64> = idx.iter().map(|&i| p[i]).collect();
        let fit = proj.apply(&vals);
        for &i in &idx {
            assert!((fit.eval(s.atom(i)) - p[i]).abs() < 1e-9);
        }

        let f = random_f(&s, 11 + k as u64);
        let g = random_f(&s, 21 + k as u64);
        let fv: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
        let gv: Vec<f64> = idx.iter().map(|&i| g[i]).collect();
        let comb: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let (pf, pg, pc) = (proj.apply(&fv), proj.apply(&gv), proj.apply(&comb));
        for &i in &idx {
            let x = s.atom(i);
            assert!((pc.eval(x) - (2.0 * pf.eval(x) - 3.0 * pg.eval(x))).abs() < 1e-9);
        }
    }
}

#[test]
fn representation_formula_matches_orthonormal_sum() {
    let s = cantor(5);
    let mut worst = 0.0f64;
    for t in 0..50u64 {
        let q = cube_at_atom(&s, (t as usize * 37) % s.len(), 0.25 + 0.01 * t as f64);
        let (proj, idx) = build_projection(&s, &q, 2).unwrap();
        let f = random_f(&s, 100 + t);
        let vals: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
        let a = proj.apply(&vals);
        let b = proj.apply_repr(&vals);
        for &i in &idx {
            worst = worst.max((a.eval(s.atom(i)) - b.eval(s.atom(i))).abs());
        }
    }
    assert!(worst < 1e-8, "worst {worst}");
}

#[test]
fn quadratic_projection_residual_equals_l2_best_approximation() {
    let s = cantor(5);
    let q = cube_at_atom(&s, 5, 0.3);
    let f = random_f(&s, 9);
    let (proj, idx) = build_projection(&s, &q, 1).unwrap();
    let vals: Vec<f64> = idx.iter().map(|&i| f[i]).collect();
    let e = best_approx_on_set(&s, &f, &q, 2, 2).unwrap().value;
    assert!((proj.residual_norm(&vals, 2) - e).abs() < 1e-10);
}

#[test]
fn monotonicity_factor_of_a_cube_with_itself_is_one() {
    let s = cantor(4);
    let f = random_f(&s, 2);
    let q = cube_at_atom(&s, 3, 0.3);
    let e = best_approx_on_set(&s, &f, &q, 1, 2).unwrap();
    match monotonicity_factor(&e, &q, &e, &q, s.d()).unwrap() {
        CheckOutcome::Ratio { value } => assert!((value - 1.0).abs() < 1e-14),
        other => panic!("{other:?}"),
    }
}

#[test]
fn near_best_is_vacuous_on_polynomials() {
    let s = cantor(4);
    let q = cube_at_atom(&s, 40, 0.3);
    let p = poly_on_atoms(&s, &[1.0, 2.0, -1.0, 0.0, 0.0, 0.0]);
    assert!(matches!(near_best_check(&s, &q, 1, 2, &p).unwrap(), CheckOutcome::Vacuous));
    let g: Vec<f64> = (0..s.len()).map(|i| s.atom(i)[0].abs().max(s.atom(i)[1].abs())).collect();
    assert!(near_best_check(&s, &q, 1, 2, &g).unwrap().ratio().is_some_and(f64::is_finite));
}

#[test]
fn markov_ratio_vanishes_on_constants_and_is_scale_invariant() {
    let s = cantor(4);
    let q = cube_at_atom(&s, 0, 0.5);
    assert_eq!(markov_check(&s, &q, 0, 20, 4).unwrap().max_ratio, Some(0.0));
    let m = markov_check(&s, &q, 1, 100, 4).unwrap().max_ratio.expect("non-vacuous");
    assert!(m.is_finite() && m > 0.0);

    let t = 0.25;
    let scaled = s.affine_image(t, &[0.0, 0.0]).unwrap();
    let qs = Cube::new(q.center.iter().map(|c| c * t).collect(), q.half_side * t).unwrap();
    let ms = markov_check(&scaled, &qs, 1, 100, 4).unwrap().max_ratio.unwrap();
    assert!((m - ms).abs() < 1e-9 * m, "{m} vs {ms}");
}

#[test]
fn remez_on_a_line_degenerates() {
    let rep = remez_line_degeneracy(&[1e-1, 1e-2, 1e-3, 1e-4], 16).unwrap();
    assert_eq!(rep.params["blow_up_observed"], serde_json::json!(true));
}
