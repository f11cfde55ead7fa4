use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::scalar::{csum, Real};

/// A discretized norm split into its `L^p` part and the `ℓ^q` aggregate of
/// the per-scale terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub total: T,
    pub lp_part: T,
    pub seminorm_part: T,
    pub per_scale: Vec<(i32, T)>,
    /// IRLS solves that hit the iteration cap (best iterate used).
    #[serde(skip)]
    pub unconverged: usize,
}

impl<T: Real> NormReport<T> {
    pub fn new(lp_part: T, seminorm_part: T, per_scale: Vec<(i32, T)>, unconverged: usize) -> Self {
        Self { total: lp_part + seminorm_part, lp_part, seminorm_part, per_scale, unconverged }
    }

    /// Assembles `lp + (Σ_j term_j^q)^{1/q}`.
    pub fn from_scales(lp_part: T, per_scale: Vec<(i32, T)>, q: f64, unconverged: usize) -> Self {
        let semi = lq(per_scale.iter().map(|s| s.1), q);
        Self::new(lp_part, semi, per_scale, unconverged)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Per-scale table with columns `j,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["j", "value"])?;
        for (j, v) in &self.per_scale {
            w.write_record([j.to_string(), v.as_f64().to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `(Σ v^q)^{1/q}` with compensated summation.
pub fn lq<T: Real, I: IntoIterator<Item = T>>(values: I, q: f64) -> T {
    let q = T::lit(q);
    csum(values.into_iter().map(|v| v.abs().powf(q))).powf(q.recip())
}

/// `(Σ w·|v|^p)^{1/p}` with compensated summation.
pub fn weighted_lp<T: Real>(values: &[T], weights: &[T], p: f64) -> T {
    let p = T::lit(p);
    csum(values.iter().zip(weights).map(|(v, &w)| w * v.abs().powf(p))).powf(p.recip())
}
