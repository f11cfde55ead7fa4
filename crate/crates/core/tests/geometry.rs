use std::collections::HashSet;

use besov_trace::dset::{build_dset, IfsSpec};
use besov_trace::geometry::{
    build_covers, build_shells, default_finest_level, default_region, estimate_porosity, near_set_family, porous_selection, shell_modulus,
    shell_violations, whitney_decompose, DyadicCube,
};
use besov_trace::{Cube, DSet};
use proptest::prelude::*;

fn cantor(depth: u32) -> DSet {
    build_dset(&IfsSpec::four_corner(depth)).unwrap()
}

fn scan_dist(s: &DSet, x: &[f64]) -> f64 {
    (0..s.len())
        .map(|i| s.atom(i).iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Sup distance from a closed dyadic cube to the nearest atom, by linear scan.
fn scan_cube_dist(s: &DSet, q: &DyadicCube) -> f64 {
    (0..s.len())
        .map(|i| {
            (0..2)
                .map(|a| {
                    let x = s.atom(i)[a];
                    (q.lower::<f64>(a) - x).max(x - q.upper::<f64>(a)).max(0.0)
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn whitney_cubes_satisfy_distance_bounds_and_tile() {
    let s = cantor(4);
    let region = default_region(&s);
    let cover = whitney_decompose(&s, &region, default_finest_level(&s)).unwrap();
    for q in &cover.cubes {
        let diam = q.side::<f64>();
        let d = scan_cube_dist(&s, q);
        assert!(diam <= d && d <= 4.0 * diam, "{q:?}: diam {diam}, dist {d}");
    }
    // Interiors are disjoint: no kept cube has a kept ancestor or twin.
    let all: HashSet<DyadicCube> = cover.cubes.iter().chain(&cover.residual).cloned().collect();
    assert_eq!(all.len(), cover.cubes.len() + cover.residual.len());
    for q in all.iter() {
        let mut c = q.clone();
        while c.level > cover.top_level {
            c = c.parent();
            assert!(!all.contains(&c), "{q:?} inside {c:?}");
        }
    }
    let vol: f64 = all.iter().map(|q| q.volume::<f64>()).sum();
    assert!((vol - region.volume()).abs() < 1e-12 * region.volume());
    let finer = whitney_decompose(&s, &region, default_finest_level(&s) + 2).unwrap();
    // Around isolated atoms the residual shrinks like the finest cell area.
    assert!(finer.residual_volume < cover.residual_volume / 8.0);
    assert!(finer.residual_volume < 1e-3 * region.volume());
}

#[test]
fn whitney_around_a_single_atom() {
    let s = DSet::from_atoms(2, vec![0.0, 0.0], None, 1.5, None).unwrap();
    let region = Cube::new(vec![0.0, 0.0], 1.0).unwrap();
    let cover = whitney_decompose(&s, &region, 8).unwrap();
    assert!(!cover.cubes.is_empty());
    for q in &cover.cubes {
        let d = scan_cube_dist(&s, q);
        assert!(q.side::<f64>() <= d && d <= 4.0 * q.side::<f64>());
    }
}

proptest! {
    #[test]
    fn distance_to_set_matches_linear_scan(x in -0.5f64..1.5, y in -0.5f64..1.5) {
        let s = cantor(4);
        prop_assert_eq!(s.dist_to_set(&[x, y]), scan_dist(&s, &[x, y]));
    }
}

#[test]
fn cantor_measure_and_self_similarity() {
    let s = cantor(5);
    assert_eq!(s.len(), 1024);
    assert!((s.d() - 4f64.ln() / 3f64.ln()).abs() < 1e-12);
    let first = Cube::from_corner(&[0.0, 0.0], 1.0 / 3.0).unwrap();
    assert!((s.measure_of_cube(&first) - 0.25).abs() < 1e-15);
    let q = Cube::from_corner(&[0.1, 0.05], 0.5).unwrap();
    let image = Cube::from_corner(&[0.1 / 3.0 + 2.0 / 3.0, 0.05 / 3.0], 0.5 / 3.0).unwrap();
    let coarse = cantor(4);
    assert!((s.measure_of_cube(&image) - coarse.measure_of_cube(&q) / 4.0).abs() < 1e-15);
}

#[test]
fn near_set_family_matches_exhaustive_scan() {
    let s = build_dset::<f64>(&IfsSpec::vicsek(3)).unwrap();
    let gamma = 1.0;
    let fam = near_set_family(&s, gamma, 3).unwrap();
    let got: HashSet<DyadicCube> = fam.cubes.iter().cloned().collect();
    let b = s.bounding();
    let mut want = HashSet::new();
    for level in 0..=3 {
        let m = 1i64 << level;
        let h = 1.0 / m as f64;
        for iy in -2 * m..2 * m {
            for ix in -2 * m..2 * m {
                let q = DyadicCube::new(level, &[ix, iy]);
                let inside = (0..2).all(|a| q.lower::<f64>(a) >= b.lower(a) && q.upper::<f64>(a) <= b.upper(a));
                if inside && scan_dist(&s, &q.center::<f64>()) <= gamma * h {
                    want.insert(q);
                }
            }
        }
    }
    assert_eq!(got, want);
}

#[test]
fn covers_contain_every_atom_and_colors_are_disjoint() {
    let s = cantor(5);
    let fam = build_covers(&s, 3, 16000.0).unwrap();
    let fam = if fam.cubes.len() > 1 { fam } else { build_covers(&s, 20, 16000.0).unwrap() };
    for i in 0..s.len() {
        assert!(fam.cubes.iter().any(|q| q.contains(s.atom(i))));
    }
    for class in &fam.color_classes {
        for (a, &x) in class.iter().enumerate() {
            for &y in &class[a + 1..] {
                assert!(!fam.cubes[x].scaled(2.0).intersects(&fam.cubes[y].scaled(2.0)) || touching_only(&fam.cubes[x], &fam.cubes[y]));
            }
        }
    }
}

fn touching_only(a: &Cube, b: &Cube) -> bool {
    (0..a.dim()).any(|i| (a.center[i] - b.center[i]).abs() == 2.0 * (a.half_side + b.half_side))
}

#[test]
fn shells_with_equal_residues_are_disjoint() {
    assert_eq!(shell_modulus(), 8);
    assert!(shell_violations(&build_shells(-10, 30)).is_empty());
}

#[test]
fn porous_selection_on_the_cantor_set() {
    let s = cantor(5);
    let est = estimate_porosity(&s, 200, 1).unwrap();
    assert!(est.kappa <= 8.0);
    let fam = near_set_family(&s, 1.0, 3).unwrap();
    let sel = porous_selection(&fam, &s, est.kappa).unwrap();
    assert!(sel.audit(&s).is_clean());
    assert!(sel.disjointness_violations().is_empty());
    for (q, r) in &sel.assignment {
        assert!(q.side::<f64>() <= sel.sigma * r.side::<f64>());
        assert!(r.inside_interior_of(q));
    }
}
