use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HardyDirection {
    /// Partial sums `Σ_{i≤j} a_i`, needs `σ < 0`.
    Prefix,
    /// Tails `Σ_{i≥j} a_i` of the finite sequence, needs `σ > 0`.
    Tail,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyResult {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, 0 when both vanish.
    pub ratio: f64,
}

/// Both sides of `Σ_j 2^{σj} (S_j)^p ≤ c Σ_j 2^{σj} a_j^p` where `S_j` is a
/// prefix or tail sum of the nonnegative sequence `a` (indices from 0).
pub fn hardy_check(a: &[f64], sigma: f64, p: f64, direction: HardyDirection) -> Result<HardyResult> {
    match direction {
        HardyDirection::Prefix if !(sigma < 0.0) => return Err(Error::Parameter(format!("prefix sums need sigma < 0, got {sigma}"))),
        HardyDirection::Tail if !(sigma > 0.0) => return Err(Error::Parameter(format!("tail sums need sigma > 0, got {sigma}"))),
        _ => {}
    }
    if !(p > 0.0) {
        return Err(Error::Parameter(format!("p must be positive, got {p}")));
    }
    if let Some(x) = a.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Parameter(format!("sequence entries must be nonnegative, found {x}")));
    }
    let partial: Vec<f64> = match direction {
        HardyDirection::Prefix => {
            let mut acc = CompensatedSum::new();
            a.iter().map(|&x| {
                acc.add(x);
                acc.value()
            }).collect()
        }
        HardyDirection::Tail => {
            let mut acc = CompensatedSum::new();
            let mut v: Vec<f64> = a.iter().rev().map(|&x| {
                acc.add(x);
                acc.value()
            }).collect();
            v.reverse();
            v
        }
    };
    let weight = |j: usize| (sigma * j as f64).exp2();
    let lhs: CompensatedSum<f64> = partial.iter().enumerate().map(|(j, s)| weight(j) * s.powf(p)).collect();
    let rhs: CompensatedSum<f64> = a.iter().enumerate().map(|(j, x)| weight(j) * x.powf(p)).collect();
    let (lhs, rhs) = (lhs.value(), rhs.value());
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HardyResult { lhs, rhs, ratio })
}
