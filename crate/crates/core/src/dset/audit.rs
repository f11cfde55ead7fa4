use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::Cube;
use crate::scalar::Real;

use super::set::DSet;

/// `c2/c1` above this value marks the sample as not regular.
pub const REGULARITY_RATIO_LIMIT: f64 = 1e3;

/// Floor for the radius ladder when the set has no positive spacing.
const MIN_RADIUS: f64 = 1.0 / (1u64 << 30) as f64;

#[derive(Clone, Debug, Serialize)]
pub struct RegularityWitness {
    pub atom: usize,
    pub r: f64,
    pub ratio: f64,
}

/// Empirical lower/upper constants of `μ(Q(w,r)) / r^d`.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub c1: f64,
    pub c2: f64,
    pub r_range: (f64, f64),
    pub samples: usize,
    pub ratio: f64,
    pub regular: bool,
    pub min_witness: RegularityWitness,
    pub max_witness: RegularityWitness,
}

/// Quarter-octave radii `2^{-k/4}` in `[r_min, 1]`, largest first.
pub fn radius_ladder(r_min: f64) -> Vec<f64> {
    let r_min = r_min.max(MIN_RADIUS);
    (0..)
        .map(|k| 2f64.powf(-(k as f64) / 4.0))
        .take_while(|&r| r >= r_min)
        .collect()
}

/// Samples atoms uniformly (with replacement) and records the extreme values
/// of `μ(Q(w,r))/r^d` over `r` in the ladder on `[4·spacing, 1]`.
pub fn audit_regularity<T: Real>(s: &DSet<T>, samples: usize, rng_seed: u64) -> RegularityReport {
    audit_regularity_on(s, samples, rng_seed, 4.0 * s.spacing().as_f64())
}

/// Same audit with an explicit lower end of the radius ladder.
pub fn audit_regularity_on<T: Real>(s: &DSet<T>, samples: usize, rng_seed: u64, r_min: f64) -> RegularityReport {
    let samples = samples.max(1);
    let ladder = radius_ladder(r_min);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut lo = RegularityWitness { atom: 0, r: 1.0, ratio: f64::INFINITY };
    let mut hi = RegularityWitness { atom: 0, r: 1.0, ratio: f64::NEG_INFINITY };
    for _ in 0..samples {
        let w = rng.gen_range(0..s.len());
        for &r in &ladder {
            let q = Cube::new(s.atom(w).to_vec(), T::lit(r)).expect("positive radius");
            let ratio = s.measure_of_cube(&q).as_f64() / r.powf(s.d());
            if ratio < lo.ratio {
                lo = RegularityWitness { atom: w, r, ratio };
            }
            if ratio > hi.ratio {
                hi = RegularityWitness { atom: w, r, ratio };
            }
        }
    }
    let ratio = hi.ratio / lo.ratio;
    RegularityReport {
        c1: lo.ratio,
        c2: hi.ratio,
        r_range: (*ladder.last().unwrap_or(&1.0), 1.0),
        samples,
        ratio,
        regular: ratio <= REGULARITY_RATIO_LIMIT,
        min_witness: lo,
        max_witness: hi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dset::{build_dset, IfsSpec};

    #[test]
    fn ladder_is_monotone_in_range() {
        let a = radius_ladder(0.01);
        let b = radius_ladder(0.001);
        assert_eq!(a[..], b[..a.len()]);
        assert_eq!(a[0], 1.0);
    }

    #[test]
    fn single_atom_is_flagged() {
        let s = DSet::from_atoms(2, vec![0.25, 0.25], None, 1.26, None).unwrap();
        let rep = audit_regularity(&s, 4, 1);
        assert!(!rep.regular);
    }

    #[test]
    fn cantor_constants_are_tight() {
        let s = build_dset::<f64>(&IfsSpec::four_corner(5)).unwrap();
        let rep = audit_regularity(&s, 64, 3);
        assert!(rep.c1 <= rep.c2);
        assert!(rep.regular);
    }
}
