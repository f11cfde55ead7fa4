use anyhow::Result;
use besov_trace::norms::{hardy_check, porous_summation_check, tower_coefficients, HardyDirection};
use besov_trace::trial_rng;
use rand::Rng;
use serde_json::json;

use super::{depth_change, max_opt, stability_json, Ctx};
use crate::report::{Plot, Record, Status, SuiteOutput};

const HARDY_SEQUENCES: u64 = 1000;
const HARDY_LENGTHS: [usize; 2] = [32, 64];
const HARDY_EXPONENTS: [f64; 2] = [1.5, 2.0];

/// Uniform, sparse, geometrically growing or decaying, and impulse-like
/// nonnegative sequences.
fn sequence(seed: u64, trial: u64, len: usize) -> Vec<f64> {
    let mut rng = trial_rng(seed, trial);
    match trial % 4 {
        0 => (0..len).map(|_| rng.gen_range(0.0..1.0)).collect(),
        1 => (0..len).map(|_| if rng.gen_bool(0.1) { rng.gen_range(0.0..1.0) } else { 0.0 }).collect(),
        2 => {
            let c = rng.gen_range(-0.75..0.75);
            (0..len).map(|i| (c * i as f64).exp2() * rng.gen_range(0.5..1.0)).collect()
        }
        _ => {
            let at = rng.gen_range(0..len);
            (0..len).map(|i| if i == at { 1.0 } else { 1e-3 * rng.gen_range(0.0..1.0) }).collect()
        }
    }
}

pub fn hardy(ctx: &Ctx) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::default();
    let seed = ctx.seed(3);
    for (name, sigma, dir) in [("hardy_prefix", -1.0, HardyDirection::Prefix), ("hardy_tail", 1.0, HardyDirection::Tail)] {
        let mut per_len = Vec::new();
        let mut witnesses = Vec::new();
        let mut hist = Vec::new();
        for len in HARDY_LENGTHS {
            let mut best: Option<(f64, u64, f64)> = None;
            for t in 0..HARDY_SEQUENCES {
                let a = sequence(seed, t, len);
                for p in HARDY_EXPONENTS {
                    let r = hardy_check(&a, sigma, p, dir)?.ratio;
                    if len == HARDY_LENGTHS[1] && p == 2.0 {
                        hist.push(r);
                    }
                    if best.is_none_or(|b| r > b.0) {
                        best = Some((r, t, p));
                    }
                }
            }
            let (r, t, p) = best.expect("at least one sequence");
            witnesses.push(json!({"length": len, "trial": t, "p": p, "ratio": r}));
            per_len.push((len, r));
        }
        let (stable, change) = depth_change(Some(per_len[0].1), Some(per_len[1].1));
        let max = per_len.iter().map(|x| x.1).fold(0.0, f64::max);
        let details = json!({
            "sigma": sigma,
            "exponents": HARDY_EXPONENTS,
            "sequences": HARDY_SEQUENCES,
            "per_length": per_len.iter().map(|(l, r)| json!({"length": l, "max_ratio": r})).collect::<Vec<_>>(),
            "change": change,
        });
        out.records.push(Record::new(name, Status::of(stable && max.is_finite()), Some(max), details).with_witnesses(witnesses));
        out.plots.push(Plot::Histogram { name: format!("{name}_ratios"), title: format!("{name}: lhs/rhs, length 64, p = 2"), values: hist });
    }
    Ok(out)
}

const RANDOM_MAPS: u64 = 100;
const TOWERS: usize = 20;

pub fn porous_summation(ctx: &Ctx) -> Result<SuiteOutput> {
    let (p, q) = (ctx.cfg.params.p, ctx.cfg.params.q);
    let base = ctx.set(ctx.depth())?;
    // Finest family level kept above the base spacing at both depths.
    let level = ((0.5 / base.spacing()).log2().floor() as i32).max(0);
    let seed = ctx.seed(4);
    let mut rng = trial_rng(seed, u64::MAX);
    let anchors: Vec<Vec<f64>> = (0..TOWERS).map(|_| base.atom(rng.gen_range(0..base.len())).to_vec()).collect();
    let mut per_depth = Vec::new();
    let mut witnesses = Vec::new();
    let mut tower_max = None;
    let mut random_max = None;
    let mut empty = true;
    for depth in ctx.depths() {
        let s = ctx.set(depth)?;
        let family = besov_trace::geometry::near_set_family(&s, 1.0, level)?;
        empty &= family.cubes.is_empty();
        let mut best: Option<(f64, serde_json::Value)> = None;
        let mut consider = |r: Option<f64>, w: serde_json::Value| {
            if let Some(r) = r {
                if best.as_ref().is_none_or(|b| r > b.0) {
                    best = Some((r, w));
                }
            }
        };
        let mut dt = None;
        for x in &anchors {
            let a = tower_coefficients(&family, x, p);
            let r = porous_summation_check(&family, &a, p, q)?.ratio;
            dt = max_opt(dt, r);
            consider(r, json!({"depth": depth, "tower_at": x, "ratio": r}));
        }
        let mut dr = None;
        for t in 0..RANDOM_MAPS {
            let mut rng = trial_rng(seed, t);
            // Level-dependent scaling lets the random maps favour fine or coarse cubes.
            let tilt = rng.gen_range(-1.0..1.0) * s.n() as f64 / p;
            let a: Vec<f64> = family.cubes.iter().map(|c| rng.gen_range(0.0..1.0) * (tilt * c.level as f64).exp2()).collect();
            let r = porous_summation_check(&family, &a, p, q)?.ratio;
            dr = max_opt(dr, r);
            consider(r, json!({"depth": depth, "map": t, "ratio": r}));
        }
        tower_max = max_opt(tower_max, dt);
        random_max = max_opt(random_max, dr);
        per_depth.push((depth, max_opt(dt, dr)));
        witnesses.extend(best.map(|b| b.1));
    }
    let (stable, _) = depth_change(per_depth[0].1, per_depth[1].1);
    let status = if empty { Status::Vacuous } else { Status::of(stable) };
    let details = json!({
        "p": p,
        "q": q,
        "family_levels": level,
        "towers": TOWERS,
        "random_maps": RANDOM_MAPS,
        "tower_max": tower_max,
        "random_max": random_max,
        "stability": stability_json(&per_depth),
    });
    let max = max_opt(per_depth[0].1, per_depth[1].1);
    Ok(SuiteOutput::record(Record::new("porous_summation", status, max, details).with_witnesses(witnesses)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences_are_nonnegative_and_reproducible() {
        for t in 0..8 {
            let a = sequence(5, t, 32);
            assert_eq!(a, sequence(5, t, 32));
            assert!(a.iter().all(|x| *x >= 0.0 && x.is_finite()));
        }
    }
}
