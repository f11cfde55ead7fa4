use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::time::Instant;

use anyhow::{Context, Result};
use besov_trace::dset::build_dset;
use besov_trace::DSet;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::report::{Plot, SuiteOutput, SuiteReport, Table};

mod geometry;
mod norms;
mod poly;
mod sums;
mod trace;

/// Ratio of maxima between two depths above which a constant counts as
/// depth-dependent.
pub const DEPTH_STABILITY: f64 = 2.0;

pub struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    sets: RefCell<HashMap<u32, Rc<DSet>>>,
}

impl<'a> Ctx<'a> {
    pub fn new(cfg: &'a ExperimentConfig) -> Self {
        Self { cfg, sets: RefCell::new(HashMap::new()) }
    }

    pub fn depth(&self) -> u32 {
        self.cfg.ifs.depth
    }

    /// The configured depth and the next one.
    pub fn depths(&self) -> [u32; 2] {
        [self.depth(), self.depth() + 1]
    }

    pub fn set(&self, depth: u32) -> Result<Rc<DSet>> {
        if let Some(s) = self.sets.borrow().get(&depth) {
            return Ok(s.clone());
        }
        let spec = besov_trace::dset::IfsSpec { depth, ..self.cfg.ifs.clone() };
        let s = Rc::new(build_dset(&spec).with_context(|| format!("building the set at depth {depth}"))?);
        self.sets.borrow_mut().insert(depth, s.clone());
        Ok(s)
    }

    /// Per-suite seed so suites do not share random streams.
    pub fn seed(&self, salt: u64) -> u64 {
        self.cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt)
    }
}

/// Compares maxima of a ratio at two depths. Both must be finite; `None`
/// (vacuous everywhere) at both depths counts as stable.
pub fn depth_change(a: Option<f64>, b: Option<f64>) -> (bool, Option<f64>) {
    match (a, b) {
        (None, None) => (true, None),
        (Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
            if x <= 0.0 && y <= 0.0 {
                return (true, Some(1.0));
            }
            let c = if x.min(y) > 0.0 { x.max(y) / x.min(y) } else { f64::INFINITY };
            (c < DEPTH_STABILITY, Some(c))
        }
        _ => (false, None),
    }
}

pub fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub fn stability_json(per_depth: &[(u32, Option<f64>)]) -> Value {
    let (ok, change) = depth_change(per_depth[0].1, per_depth[1].1);
    json!({
        "per_depth": per_depth.iter().map(|(d, v)| json!({"depth": d, "max": v})).collect::<Vec<_>>(),
        "change": change,
        "stable": ok,
    })
}

fn run_one(name: &str, ctx: &Ctx) -> Result<SuiteOutput> {
    match name {
        "whitney" => geometry::whitney(ctx),
        "disjointness" => geometry::disjointness(ctx),
        "regularity" => geometry::regularity(ctx),
        "hardy" => sums::hardy(ctx),
        "porous_summation" => sums::porous_summation(ctx),
        "remez" => poly::remez(ctx),
        "projection" => poly::projection(ctx),
        "norm_equivalence" => norms::norm_equivalence(ctx),
        "reference_oracle" => norms::reference_oracle(ctx),
        "trace_identity" => trace::trace_identity(ctx),
        "roundtrip" => trace::roundtrip(ctx),
        "local_transfer" => trace::local_transfer(ctx),
        "damping" => trace::damping(ctx),
        other => anyhow::bail!("unknown suite {other:?}"),
    }
}

pub struct RunOutput {
    pub report: SuiteReport,
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
}

/// Validates the config and runs its suites in declared order.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let ctx = Ctx::new(cfg);
    let mut out = RunOutput { report: SuiteReport { seed: cfg.seed, depth: cfg.ifs.depth, records: Vec::new() }, tables: Vec::new(), plots: Vec::new() };
    let mut seen = Vec::new();
    for name in &cfg.suites {
        if seen.contains(name) {
            continue;
        }
        seen.push(name.clone());
        let start = Instant::now();
        let mut res = run_one(name, &ctx).with_context(|| format!("suite {name} failed"))?;
        let secs = start.elapsed().as_secs_f64() / res.records.len().max(1) as f64;
        for r in &mut res.records {
            r.runtime = secs;
        }
        out.report.records.extend(res.records);
        out.tables.extend(res.tables);
        out.plots.extend(res.plots);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_change_rules() {
        assert_eq!(depth_change(Some(1.0), Some(1.5)), (true, Some(1.5)));
        assert!(!depth_change(Some(1.0), Some(2.5)).0);
        assert!(!depth_change(Some(1.0), None).0);
        assert!(!depth_change(Some(f64::INFINITY), Some(1.0)).0);
        assert!(depth_change(None, None).0);
        assert!(depth_change(Some(0.0), Some(0.0)).0);
    }

    #[test]
    fn empty_suite_list_gives_empty_report() {
        let cfg = ExperimentConfig { suites: vec![], ..Default::default() };
        let out = run(&cfg).unwrap();
        assert!(out.report.records.is_empty() && !out.report.failed());
    }

    #[test]
    fn unknown_suite_is_rejected_before_running() {
        let cfg = ExperimentConfig { suites: vec!["hardy".into(), "bogus".into()], ..Default::default() };
        assert!(run(&cfg).is_err());
    }
}
