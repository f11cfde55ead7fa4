use besov_trace::approx::best_approx_on_grid;
use besov_trace::dset::{build_dset, IfsSpec};
use besov_trace::geometry::{near_set_family, DyadicCube, Grid, NearSetFamily};
use besov_trace::norms::{
    besov_norm_on_grid, besov_norm_on_set, dyadic_power_integral, hardy_check, porous_summation_check, sharp_maximal, tl_norm_on_grid,
    tower_coefficients, GridQuadrature, HardyDirection, NormParams,
};
use besov_trace::{trial_rng, Cube, DSet};
use proptest::prelude::*;
use rand::Rng;

fn cantor(depth: u32) -> DSet {
    build_dset(&IfsSpec::four_corner(depth)).unwrap()
}

fn params(alpha: f64, p: f64, k: usize, u: u32) -> NormParams {
    NormParams { alpha, p, q: p, u, k, j_min: 0, j_max: 4 }
}

fn unit_grid(size: usize) -> Grid<f64> {
    Grid::over(&Cube::new(vec![0.5, 0.5], 0.5).unwrap(), size).unwrap()
}

fn tent(x: &[f64]) -> f64 {
    let d = (x[0] - 0.5).abs().max((x[1] - 0.5).abs());
    (1.0 - 4.0 * d).max(0.0)
}

#[test]
fn zero_constant_and_polynomial_functions() {
    let s = cantor(4);
    let pr = params(0.9, 2.0, 2, 2);
    assert_eq!(besov_norm_on_set(&vec![0.0; s.len()], &s, &pr, false).unwrap().total, 0.0);
    let c = besov_norm_on_set(&vec![1.5; s.len()], &s, &pr, true).unwrap();
    assert!(c.seminorm_part < 1e-12 && (c.total - 1.5).abs() < 1e-12);

    let g = unit_grid(64);
    let lin = g.sample(|x| 2.0 - x[0] + 3.0 * x[1]);
    for u in [1, 2] {
        assert!(besov_norm_on_grid(&g, &lin, &params(0.9, 2.0, 2, u), &GridQuadrature::default()).unwrap().seminorm_part < 1e-9);
    }
    let tl = tl_norm_on_grid(&g, &lin, &params(0.9, 2.0, 2, 1), &GridQuadrature::default()).unwrap();
    assert!(tl.seminorm_part < 1e-9);
    assert_eq!(tl_norm_on_grid(&g, &vec![0.0; g.len()], &params(0.9, 2.0, 2, 1), &GridQuadrature::default()).unwrap().total, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn set_norm_is_homogeneous_and_subadditive(seed in 0u64..1000, lambda in -4.0f64..4.0, u in 1u32..=2, k in 1usize..=2) {
        let s = cantor(3);
        let mut rng = trial_rng(seed, 0);
        let f: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..s.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pr = params(0.7, 2.0, k, u);
        let nf = besov_norm_on_set(&f, &s, &pr, false).unwrap().total;
        let ng = besov_norm_on_set(&g, &s, &pr, false).unwrap().total;
        let lf: Vec<f64> = f.iter().map(|v| lambda * v).collect();
        let nl = besov_norm_on_set(&lf, &s, &pr, false).unwrap().total;
        prop_assert!((nl - lambda.abs() * nf).abs() < 1e-9 * (1.0 + nl));
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let ns = besov_norm_on_set(&sum, &s, &pr, false).unwrap().total;
        prop_assert!(ns <= nf + ng + 1e-9);
    }
}

#[test]
fn tl_equals_besov_when_p_equals_q() {
    let g = unit_grid(64);
    let f = g.sample(|x| (7.0 * x[0]).sin() * (3.0 * x[1]).cos() + tent(x));
    for p in [1.5, 2.0] {
        let pr = params(0.8, p, 1, 1);
        let b = besov_norm_on_grid(&g, &f, &pr, &GridQuadrature::default()).unwrap();
        let t = tl_norm_on_grid(&g, &f, &pr, &GridQuadrature::default()).unwrap();
        assert!((b.seminorm_part - t.seminorm_part).abs() < 1e-12 * b.seminorm_part, "{} vs {}", b.seminorm_part, t.seminorm_part);
    }
}

#[test]
fn tent_per_scale_terms_decay_geometrically() {
    // The kinks of the tent lie on a set of dimension one, where ℰ₂ at scale
    // 2^{−j} is of order 2^{−j} on a band of area 2^{−j}: the L^p term is
    // 2^{jα}·2^{−j}·2^{−j/p}. Windows a few cells wide flatten it slightly.
    let g = unit_grid(256);
    let f = g.sample(tent);
    let (alpha, p) = (0.5, 2.0);
    let pr = NormParams { alpha, p, q: p, u: 2, k: 2, j_min: 3, j_max: 6 };
    let rep = besov_norm_on_grid(&g, &f, &pr, &GridQuadrature { outer_stride: 2, inner_max: 33 }).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rep.per_scale.iter().map(|&(j, v)| (j as f64, v.log2())).unzip();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let expected = alpha - 1.0 - 1.0 / p;
    assert!((slope - expected).abs() < 0.2, "slope {slope}, expected {expected}");
}

#[test]
fn sharp_maximal_function() {
    let g = unit_grid(64);
    let pr = NormParams { alpha: 1.3, p: 2.0, q: 2.0, u: 1, k: 2, j_min: 0, j_max: 4 };
    let centre = g.linear_index(&[32, 32]);
    let lin = g.sample(|x| 1.0 + x[0] - x[1]);
    assert!(sharp_maximal(&g, &lin, centre, &pr).unwrap() < 1e-9);
    assert_eq!(sharp_maximal(&g, &vec![0.0; g.len()], centre, &pr).unwrap(), 0.0);
    assert!(sharp_maximal(&g, &lin, centre, &NormParams { k: 3, ..pr }).is_err());

    let f = g.sample(tent);
    let got = sharp_maximal(&g, &f, centre, &pr).unwrap();
    let x = g.point(centre);
    let (j0, j1) = pr.resolved_window(g.step).unwrap();
    let ladder = (j0..=j1)
        .map(|j| {
            let r = (-j as f64).exp2();
            let e = best_approx_on_grid(&g, &f, &Cube::new(x.clone(), r).unwrap(), 2, 1).unwrap().value;
            (j as f64 * pr.alpha).exp2() * e
        })
        .fold(0.0, f64::max);
    assert!(got > 0.0);
    assert!((got - ladder).abs() < 1e-9 * ladder, "{got} vs {ladder}");
}

#[test]
fn hardy_sides_match_naive_double_sums() {
    let mut rng = trial_rng(17, 0);
    for t in 0..100 {
        let len = 8 + t % 24;
        let a: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..1.0)).collect();
        for (sigma, dir) in [(-1.0, HardyDirection::Prefix), (1.0, HardyDirection::Tail)] {
            let r = hardy_check(&a, sigma, 2.0, dir).unwrap();
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for j in 0..len {
                let s: f64 = match dir {
                    HardyDirection::Prefix => (0..=j).map(|i| a[i]).sum(),
                    HardyDirection::Tail => (j..len).map(|i| a[i]).sum(),
                };
                lhs += 2f64.powf(sigma * j as f64) * s * s;
                rhs += 2f64.powf(sigma * j as f64) * a[j] * a[j];
            }
            assert!((r.lhs - lhs).abs() < 1e-12 * lhs);
            assert!((r.rhs - rhs).abs() < 1e-12 * rhs);
        }
    }
    assert!(hardy_check(&[1.0], 1.0, 2.0, HardyDirection::Prefix).is_err());
    assert_eq!(hardy_check(&[0.0; 5], -1.0, 2.0, HardyDirection::Prefix).unwrap().ratio, 0.0);
}

/// `∫ (Σ b_Q χ_Q)^s` by midpoint quadrature on a `2^level` grid over `[0,1]²`;
/// exact when every cube is at most that fine.
fn midpoint_integral(terms: &[(DyadicCube, f64)], s: f64, level: i32) -> f64 {
    let m = 1usize << level;
    let h = 1.0 / m as f64;
    let mut acc = 0.0;
    for iy in 0..m {
        for ix in 0..m {
            let x = [(ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h];
            let v: f64 = terms.iter().filter(|(q, _)| q.contains_point(&x)).map(|(_, b)| b).sum();
            acc += v.powf(s) * h * h;
        }
    }
    acc
}

#[test]
fn dyadic_integral_matches_midpoint_quadrature() {
    let mut rng = trial_rng(23, 0);
    for _ in 0..10 {
        let terms: Vec<(DyadicCube, f64)> = (0..12)
            .map(|_| {
                let level = rng.gen_range(0..5);
                let m = 1i64 << level;
                (DyadicCube::new(level, &[rng.gen_range(0..m), rng.gen_range(0..m)]), rng.gen_range(0.0..2.0))
            })
            .collect();
        for s in [1.5, 2.0, 0.75] {
            let exact = dyadic_power_integral(&terms, s);
            let quad = midpoint_integral(&terms, s, 5);
            assert!((exact - quad).abs() < 1e-12 * (1.0 + quad), "{exact} vs {quad}");
        }
    }
}

#[test]
fn porous_summation_on_simple_families() {
    let single = NearSetFamily { gamma: 1.0, max_level: 2, cubes: vec![DyadicCube::new(2, &[1, 2])] };
    let r = porous_summation_check(&single, &[1.0], 2.0, 2.0).unwrap();
    assert!((r.lhs - 0.25).abs() < 1e-15 && r.ratio == Some(1.0));
    let empty = NearSetFamily { gamma: 1.0, max_level: 2, cubes: vec![] };
    assert_eq!(porous_summation_check::<f64>(&empty, &[], 2.0, 2.0).unwrap().ratio, None);

    let s = cantor(5);
    let fam = near_set_family(&s, 1.0, 4).unwrap();
    let a = tower_coefficients(&fam, s.atom(0), 2.0);
    let tower = porous_summation_check(&fam, &a, 2.0, 2.0).unwrap();
    assert!(tower.ratio.is_some_and(|v| v.is_finite() && v >= 1.0));
}
