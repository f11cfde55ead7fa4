use std::collections::HashMap;

use anyhow::Result;
use besov_trace::geometry::Grid;
use besov_trace::Cube;
use besov_trace::norms::{besov_norm_on_grid, besov_norm_on_set, tl_norm_on_grid, GridQuadrature, NormParams, NormReport};
use besov_trace::trial_rng;
use rand::Rng;
use serde_json::json;

use super::{depth_change, max_opt, stability_json, Ctx};
use crate::corpus::{standard_corpus, TestFn};
use crate::reference;
use crate::report::{Plot, Record, Status, SuiteOutput, Table};

const CORPUS: usize = 8;

/// `max(a/b, b/a)`, or `None` when both sides vanish.
fn two_sided(a: f64, b: f64) -> Option<f64> {
    if a <= 1e-12 && b <= 1e-12 {
        None
    } else if a <= 0.0 || b <= 0.0 {
        Some(f64::INFINITY)
    } else {
        Some((a / b).max(b / a))
    }
}

/// Set norms keyed by depth, corpus index, `k` and `u`.
type Cache = HashMap<(u32, usize, usize, u32), NormReport<f64>>;

struct Variant {
    label: String,
    params: NormParams,
}

/// Compares the set norm under two parameter choices over the corpus at both
/// depths.
#[allow(clippy::too_many_arguments)]
fn compare(ctx: &Ctx, name: &str, corpus: &[TestFn], a: Variant, b: Variant, cache: &mut Cache, table: &mut Table, plot: &mut Vec<(String, Vec<(f64, f64)>)>) -> Result<Record> {
    let mut per_depth = Vec::new();
    let mut witnesses = Vec::new();
    for depth in ctx.depths() {
        let s = ctx.set(depth)?;
        let mut best: Option<f64> = None;
        let mut arg = None;
        for (fi, f) in corpus.iter().enumerate() {
            let vals = f.on_atoms(&s);
            let mut norm = |pr: &NormParams| -> Result<NormReport<f64>> {
                let key = (depth, fi, pr.k, pr.u);
                if let Some(r) = cache.get(&key) {
                    return Ok(r.clone());
                }
                let r = besov_norm_on_set(&vals, &s, pr, false)?;
                cache.insert(key, r.clone());
                Ok(r)
            };
            let ra = norm(&a.params)?;
            let rb = norm(&b.params)?;
            for (v, r) in [(&a, &ra), (&b, &rb)] {
                for (j, e) in &r.per_scale {
                    table.push([name.to_string(), depth.to_string(), fi.to_string(), f.kind().to_string(), v.label.clone(), j.to_string(), format!("{e:.6e}")]);
                }
                if depth == ctx.depth() && fi == CORPUS - 1 {
                    plot.push((format!("{name} {}", v.label), decay(r)));
                }
            }
            let c = two_sided(ra.total, rb.total);
            if c.is_some() && c > best {
                best = c;
                arg = Some(json!({"depth": depth, "function": fi, "kind": f.kind(), a.label.clone(): ra.total, b.label.clone(): rb.total}));
            }
        }
        per_depth.push((depth, best));
        witnesses.extend(arg);
    }
    let (stable, _) = depth_change(per_depth[0].1, per_depth[1].1);
    let details = json!({
        "variants": {a.label.clone(): a.params, b.label.clone(): b.params},
        "functions": corpus.len(),
        "stability": stability_json(&per_depth),
    });
    Ok(Record::new(name, Status::of(stable), max_opt(per_depth[0].1, per_depth[1].1), details).with_witnesses(witnesses))
}

fn decay(r: &NormReport<f64>) -> Vec<(f64, f64)> {
    r.per_scale.iter().map(|(j, e)| (*j as f64, *e)).collect()
}

pub fn norm_equivalence(ctx: &Ctx) -> Result<SuiteOutput> {
    let base = ctx.set(ctx.depth())?;
    let pr = ctx.cfg.params.clone();
    let mut table = Table::new("norm_equivalence_scales", &["record", "depth", "function", "kind", "variant", "j", "weighted"]);
    let mut series = Vec::new();
    let mut out = SuiteOutput::default();

    // u-independence needs smoothness below k minus the trace loss.
    let ku = pr.k.max((pr.alpha + pr.trace_loss(base.n(), base.d())).floor() as usize + 1);
    let corpus = standard_corpus(&base, ku.max(pr.k + 1), CORPUS, ctx.seed(7));
    let mut cache = Cache::new();
    let a = Variant { label: format!("k={}", pr.k), params: pr.clone() };
    let b = Variant { label: format!("k={}", pr.k + 1), params: NormParams { k: pr.k + 1, ..pr.clone() } };
    out.records.push(compare(ctx, "k_independence", &corpus, a, b, &mut cache, &mut table, &mut series)?);

    if pr.p >= 2.0 {
        let a = Variant { label: format!("k={ku}, u=1"), params: NormParams { k: ku, u: 1, ..pr.clone() } };
        let b = Variant { label: format!("k={ku}, u=2"), params: NormParams { k: ku, u: 2, ..pr.clone() } };
        out.records.push(compare(ctx, "u_independence", &corpus, a, b, &mut cache, &mut table, &mut series)?);
    } else {
        let details = json!({"reason": format!("u = 2 needs p ≥ 2, got p = {}", pr.p)});
        out.records.push(Record::new("u_independence", Status::Vacuous, None, details));
    }
    out.tables.push(table);
    out.plots.push(Plot::Decay { name: "norm_equivalence_decay".into(), title: "weighted scale terms, last corpus function".into(), series });
    Ok(out)
}

const ORACLE_INPUTS: u64 = 10;
const ORACLE_TOL: f64 = 1e-9;

fn random_params<R: Rng>(rng: &mut R, min_alpha: f64) -> NormParams {
    let k = rng.gen_range(1..=2usize);
    let p = rng.gen_range(1.2..3.0);
    let lo = min_alpha.min(k as f64 - 0.2);
    NormParams {
        alpha: rng.gen_range(lo..k as f64 - 0.05),
        p,
        q: rng.gen_range(1.2..3.0),
        u: if p >= 2.0 && rng.gen_bool(0.5) { 2 } else { 1 },
        k,
        j_min: 0,
        j_max: 5,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn reference_oracle(ctx: &Ctx) -> Result<SuiteOutput> {
    let s = ctx.set(ctx.depth())?;
    let seed = ctx.seed(9);
    let corpus = standard_corpus(&s, 2, ORACLE_INPUTS as usize, seed);
    let region = ctx.cfg.grid.region()?;
    let grid = Grid::over(&Cube::new(region.center.clone(), region.half_side)?, 32)?;
    let quad = GridQuadrature { outer_stride: 2, inner_max: 2 * grid.size + 1 };
    let loss = ctx.cfg.params.trace_loss(s.n(), s.d());
    let mut table = Table::new("reference_oracle", &["input", "kind", "path", "fast", "reference", "rel_diff"]);
    let (mut worst, mut witnesses) = (0.0f64, Vec::new());
    let mut check = |t: u64, kind: &str, path: &str, fast: f64, slow: f64, params: &NormParams| {
        let d = rel(fast, slow);
        table.push([t.to_string(), kind.to_string(), path.to_string(), format!("{fast:.15e}"), format!("{slow:.15e}"), format!("{d:.3e}")]);
        if d > worst {
            worst = d;
        }
        if d.is_nan() || d > ORACLE_TOL {
            witnesses.push(json!({"input": t, "path": path, "fast": fast, "reference": slow, "params": params}));
        }
    };
    for t in 0..ORACLE_INPUTS {
        let mut rng = trial_rng(seed, t + 1);
        let f = &corpus[t as usize];
        let pr = random_params(&mut rng, loss + 0.05);
        let vals = f.on_atoms(&s);
        let trace = rng.gen_bool(0.5) && pr.alpha > pr.trace_loss(s.n(), s.d());
        check(t, f.kind(), "set", besov_norm_on_set(&vals, &s, &pr, trace)?.total, reference::set_norm(&vals, &s, &pr, trace)?, &pr);

        let gv = grid.sample(|x| f.eval(x));
        let pr = random_params(&mut rng, 0.1);
        check(t, f.kind(), "grid_besov", besov_norm_on_grid(&grid, &gv, &pr, &quad)?.total, reference::grid_besov(&grid, &gv, &pr, &quad)?, &pr);
        let pr = NormParams { u: 1, ..random_params(&mut rng, 0.1) };
        check(t, f.kind(), "grid_tl", tl_norm_on_grid(&grid, &gv, &pr, &quad)?.total, reference::grid_tl(&grid, &gv, &pr, &quad)?, &pr);
    }
    let details = json!({"inputs": ORACLE_INPUTS, "tolerance": ORACLE_TOL, "grid": grid.size, "quadrature": quad, "max_rel_diff": worst});
    let ok = worst <= ORACLE_TOL && witnesses.is_empty();
    let mut out = SuiteOutput::record(Record::new("reference_oracle", Status::of(ok), Some(worst), details).with_witnesses(witnesses));
    out.tables.push(table);
    Ok(out)
}
