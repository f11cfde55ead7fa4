use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a discretized Besov or Triebel–Lizorkin norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub u: u32,
    pub k: usize,
    pub j_min: i32,
    pub j_max: i32,
}

impl NormParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 1.0 && v.is_finite()) {
                return bad(format!("{name} must lie in (1, ∞), got {v}"));
            }
        }
        if self.u != 1 && self.u != 2 {
            return bad(format!("u must be 1 or 2, got {}", self.u));
        }
        if self.u as f64 > self.p {
            return bad(format!("u = {} exceeds p = {}", self.u, self.p));
        }
        if !(self.alpha < self.k as f64) {
            return bad(format!("k = {} must exceed alpha = {}", self.k, self.alpha));
        }
        if self.j_min > self.j_max {
            return bad(format!("empty scale window [{}, {}]", self.j_min, self.j_max));
        }
        Ok(())
    }

    /// Smoothness lost under restriction to a `d`-set in `ℝⁿ`.
    pub fn trace_loss(&self, n: usize, d: f64) -> f64 {
        (n as f64 - d) / self.p
    }

    /// Requires `alpha > (n − d)/p`, the condition for a nontrivial trace.
    pub fn check_trace(&self, n: usize, d: f64) -> Result<()> {
        let loss = self.trace_loss(n, d);
        if self.alpha > loss {
            Ok(())
        } else {
            Err(Error::Parameter(format!("alpha = {} must exceed (n − d)/p = {loss}", self.alpha)))
        }
    }

    /// Clips `j_max` so that `2^{−j} ≥ 4·resolution`.
    pub fn resolved_window(&self, resolution: f64) -> Result<(i32, i32)> {
        let hi = if resolution > 0.0 { self.j_max.min((1.0 / (4.0 * resolution)).log2().floor() as i32) } else { self.j_max };
        if hi < self.j_min {
            return Err(Error::Resolution(format!(
                "no scale 2^-j with j ≥ {} is at least 4 × resolution {resolution}",
                self.j_min
            )));
        }
        Ok((self.j_min, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> NormParams {
        NormParams { alpha: 0.9, p: 2.0, q: 2.0, u: 1, k: 1, j_min: 0, j_max: 6 }
    }

    #[test]
    fn validation() {
        assert!(base().validate().is_ok());
        assert!(NormParams { k: 0, ..base() }.validate().is_err());
        assert!(NormParams { u: 2, p: 1.5, ..base() }.validate().is_err());
        assert!(NormParams { q: f64::INFINITY, ..base() }.validate().is_err());
    }

    #[test]
    fn window_clipping() {
        assert_eq!(base().resolved_window(1.0 / 64.0).unwrap(), (0, 4));
        assert!(base().resolved_window(1.0).is_err());
        assert_eq!(base().resolved_window(0.0).unwrap(), (0, 6));
    }
}
