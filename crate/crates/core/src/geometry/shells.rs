use serde::Serialize;

use crate::scalar::Real;

pub const SHELL_INNER: i64 = 80;
pub const SHELL_OUTER: i64 = 16000;

/// Distance band `80·2^{-i} ≤ dist(y,S) ≤ 16000·2^{-i}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Shell {
    pub level: i32,
    pub inner: f64,
    pub outer: f64,
}

impl Shell {
    pub fn new(level: i32) -> Self {
        let s = 2f64.powi(-level);
        Self { level, inner: SHELL_INNER as f64 * s, outer: SHELL_OUTER as f64 * s }
    }

    pub fn contains<T: Real>(&self, dist: T) -> bool {
        let d = dist.as_f64();
        self.inner <= d && d <= self.outer
    }
}

/// Smallest `m0` with `2^{-m0} < 1/200`.
pub fn shell_modulus() -> u32 {
    (0..).find(|&m| (1i64 << m) > 200).unwrap()
}

pub fn build_shells(i_min: i32, i_max: i32) -> Vec<Shell> {
    (i_min..=i_max).map(Shell::new).collect()
}

/// Exact test that two shells are disjoint bands: for `i < i'`,
/// `16000·2^{-i'} < 80·2^{-i}`, i.e. `16000 < 80·2^{i'-i}`.
pub fn shells_disjoint(a: &Shell, b: &Shell) -> bool {
    if a.level == b.level {
        return false;
    }
    let gap = (a.level - b.level).unsigned_abs();
    gap >= 63 || (SHELL_OUTER as i128) < (SHELL_INNER as i128) << gap
}

/// Pairs of distinct shells in one residue class mod `m0` that intersect.
pub fn shell_violations(shells: &[Shell]) -> Vec<(i32, i32)> {
    let m0 = shell_modulus() as i32;
    let mut out = Vec::new();
    for (k, a) in shells.iter().enumerate() {
        for b in &shells[k + 1..] {
            if a.level != b.level && (a.level - b.level).rem_euclid(m0) == 0 && !shells_disjoint(a, b) {
                out.push((a.level, b.level));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulus_is_eight() {
        assert_eq!(shell_modulus(), 8);
    }

    #[test]
    fn eight_levels_apart_are_disjoint() {
        let (a, b) = (Shell::new(3), Shell::new(11));
        assert!(shells_disjoint(&a, &b));
        assert!(b.outer < a.inner);
        assert_eq!(b.outer, 62.5 * 2f64.powi(-3));
        assert!(!shells_disjoint(&Shell::new(3), &Shell::new(10)));
    }

    #[test]
    fn residue_classes_are_clean() {
        assert!(shell_violations(&build_shells(-10, 40)).is_empty());
        assert!(shell_violations(&build_shells(2, 2)).is_empty());
    }
}
