use std::collections::hash_map::Entry;
use std::collections::HashMap;

use anyhow::Result;
use besov_trace::extension::{damping_check, flags, local_transfer_check, trace as grid_trace, ExtensionField, ExtensionOperator};
use besov_trace::geometry::{default_finest_level, default_region, whitney_decompose, Grid};
use besov_trace::norms::{besov_from_grid_table, grid_scale_table, set_norm_from_table, set_scale_table, tl_from_grid_table, NormParams};
use besov_trace::DSet;
use serde_json::json;

use super::{depth_change, max_opt, stability_json, Ctx};
use crate::corpus::{cosine_corpus, standard_corpus, TestFn};
use crate::report::{Plot, Record, Status, SuiteOutput, Table};

const TRACE_TOL: f64 = 1e-2;

fn operator(s: &DSet, grid: &Grid<f64>, k: usize, delta: f64) -> Result<ExtensionOperator<f64>> {
    let cover = whitney_decompose(s, &default_region(s), default_finest_level(s))?;
    Ok(ExtensionOperator::new(s, &cover, grid, k, delta)?)
}

/// Trace of `F` on the atoms from averages at one and two grid steps.
fn trace_values(field: &ExtensionField<f64>, s: &DSet) -> Result<Vec<f64>> {
    let h = field.grid.step;
    Ok(grid_trace(&field.grid, &field.values, s, &[2.0 * h, h])?.values)
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn trace_identity(ctx: &Ctx) -> Result<SuiteOutput> {
    let s = ctx.set(ctx.depth())?;
    let k = ctx.cfg.params.k;
    let seed = ctx.seed(10);
    let mut fns: Vec<TestFn> = standard_corpus(&s, k, 4, seed).into_iter().filter(|f| matches!(f, TestFn::Poly { .. } | TestFn::Tent { .. })).collect();
    fns.extend(cosine_corpus(s.n(), 3, seed));
    let region = s.bounding().scaled(1.5);
    let n0 = ctx.cfg.grid.resolution;
    let mut table = Table::new("trace_identity", &["grid", "function", "kind", "max_error", "sup", "degree_fallbacks"]);
    let mut errs = Vec::new();
    let mut witnesses = Vec::new();
    for size in [n0, 2 * n0] {
        let grid = Grid::over(&region, size)?;
        let op = operator(&s, &grid, k, ctx.cfg.delta)?;
        let nearest = op.flags().iter().filter(|&&f| f & flags::NEAREST_ATOM != 0).count();
        let mut worst = 0.0f64;
        for (fi, f) in fns.iter().enumerate() {
            let vals = f.on_atoms(&s);
            let field = op.apply(&vals)?;
            let tr = trace_values(&field, &s)?;
            let diff: Vec<f64> = tr.iter().zip(&vals).map(|(a, b)| a - b).collect();
            let e = sup(&diff);
            table.push([size.to_string(), fi.to_string(), f.kind().to_string(), format!("{e:.6e}"), format!("{:.6e}", sup(&vals)), op.fallback_count().to_string()]);
            if e > worst {
                worst = e;
            }
        }
        // At or below half the atom spacing the trace cubes only see nearest-atom values.
        let finest = grid.step;
        witnesses.push(json!({"grid": size, "step": grid.step, "finest_trace_scale": finest, "half_spacing": 0.5 * s.spacing(), "max_error": worst, "nearest_atom_points": nearest, "degree_fallbacks": op.fallback_count()}));
        errs.push(worst);
    }
    let ok = errs[1] < errs[0] && errs[1] <= TRACE_TOL;
    let details = json!({
        "depth": ctx.depth(),
        "k": k,
        "functions": fns.iter().map(|f| f.kind()).collect::<Vec<_>>(),
        "region": {"center": region.center, "half_side": region.half_side},
        "errors": errs,
        "tolerance": TRACE_TOL,
    });
    let mut out = SuiteOutput::record(Record::new("trace_identity", Status::of(ok), Some(errs[1]), details).with_witnesses(witnesses));
    out.tables.push(table);
    Ok(out)
}

const ROUNDTRIP_FUNCTIONS: usize = 20;
/// Seminorms below this are treated as zero.
const TINY: f64 = 1e-10;

fn ratio(num: f64, den: f64) -> Option<f64> {
    match (num <= TINY, den <= TINY) {
        (true, true) => None,
        (false, true) => Some(f64::INFINITY),
        _ => Some(num / den),
    }
}

#[derive(Default)]
struct Tally {
    per_depth: Vec<(u32, Option<f64>)>,
    witnesses: Vec<serde_json::Value>,
}

pub fn roundtrip(ctx: &Ctx) -> Result<SuiteOutput> {
    let base = ctx.set(ctx.depth())?;
    let n = base.n();
    let corpus = cosine_corpus(n, ROUNDTRIP_FUNCTIONS, ctx.seed(12));
    let grid = Grid::over(&ctx.cfg.grid.region()?, ctx.cfg.grid.resolution)?;
    let quad = ctx.cfg.grid.quadrature;
    let sets: &[NormParams] = &ctx.cfg.roundtrip_params;
    let mut besov: Vec<Tally> = sets.iter().map(|_| Tally::default()).collect();
    let mut tl: Vec<Tally> = sets.iter().map(|_| Tally::default()).collect();
    let mut table = Table::new("roundtrip", &["depth", "params", "function", "set_semi", "grid_besov_semi", "grid_tl_semi", "trace_semi", "trace_error"]);
    let mut series = Vec::new();
    let mut extra = Vec::new();
    for depth in ctx.depths() {
        let s = ctx.set(depth)?;
        let mut ops: HashMap<usize, ExtensionOperator<f64>> = HashMap::new();
        for pr in sets {
            if let Entry::Vacant(e) = ops.entry(pr.k) {
                e.insert(operator(&s, &grid, pr.k, ctx.cfg.delta)?);
            }
        }
        let mut best_b = vec![None; sets.len()];
        let mut best_t = vec![None; sets.len()];
        let mut trace_err = 0.0f64;
        for (fi, f) in corpus.iter().enumerate() {
            let vals = f.on_atoms(&s);
            let mut fields = HashMap::new();
            let mut grid_tables = HashMap::new();
            let mut set_tables = HashMap::new();
            for (pi, pr) in sets.iter().enumerate() {
                if let Entry::Vacant(e) = fields.entry(pr.k) {
                    let field = ops[&pr.k].apply(&vals)?;
                    let tr = trace_values(&field, &s)?;
                    e.insert((field, tr));
                }
                let (field, tr) = &fields[&pr.k];
                let e = tr.iter().zip(&vals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / sup(&vals).max(1e-300);
                trace_err = trace_err.max(e);
                let (gj0, gj1) = pr.resolved_window(grid.step)?;
                let (sj0, sj1) = pr.resolved_window(s.spacing())?;
                for u in [pr.u, 1] {
                    if let Entry::Vacant(e) = grid_tables.entry((pr.k, u, gj0, gj1)) {
                        e.insert(grid_scale_table(&grid, &field.values, pr.k, u, gj0, gj1, &quad)?);
                    }
                }
                for key in [(pr.k, pr.u, false, sj0, sj1), (pr.k, pr.u, true, sj0, sj1)] {
                    if let Entry::Vacant(e) = set_tables.entry(key) {
                        let v = if key.2 { tr } else { &vals };
                        e.insert(set_scale_table(&s, v, pr.k, pr.u, sj0, sj1)?);
                    }
                }
                let set_semi = set_norm_from_table(&s, &vals, &set_tables[&(pr.k, pr.u, false, sj0, sj1)], pr, true);
                let trace_semi = set_norm_from_table(&s, tr, &set_tables[&(pr.k, pr.u, true, sj0, sj1)], pr, true);
                let gb = besov_from_grid_table(&grid, &field.values, &grid_tables[&(pr.k, pr.u, gj0, gj1)], pr);
                let gt = tl_from_grid_table(&grid, &field.values, &grid_tables[&(pr.k, 1, gj0, gj1)], pr);
                table.push([
                    depth.to_string(),
                    pi.to_string(),
                    fi.to_string(),
                    format!("{:.6e}", set_semi.seminorm_part),
                    format!("{:.6e}", gb.seminorm_part),
                    format!("{:.6e}", gt.seminorm_part),
                    format!("{:.6e}", trace_semi.seminorm_part),
                    format!("{e:.3e}"),
                ]);
                if depth == ctx.depth() && fi == 0 {
                    let pts = |r: &besov_trace::norms::NormReport<f64>| r.per_scale.iter().map(|(j, v)| (*j as f64, *v)).collect::<Vec<_>>();
                    series.push((format!("set, params {pi}"), pts(&set_semi)));
                    series.push((format!("grid Besov, params {pi}"), pts(&gb)));
                }
                for (grid_semi, best, tally, kind) in [(gb.seminorm_part, &mut best_b[pi], &mut besov[pi], "besov"), (gt.seminorm_part, &mut best_t[pi], &mut tl[pi], "tl")] {
                    let fwd = ratio(grid_semi, set_semi.seminorm_part);
                    let back = ratio(trace_semi.seminorm_part, grid_semi);
                    let m = max_opt(fwd, back);
                    if m.is_some() && m > *best {
                        *best = m;
                        tally.witnesses.retain(|w| w["depth"] != depth);
                        tally.witnesses.push(json!({"depth": depth, "function": fi, "kind": kind, "forward": fwd, "back": back}));
                    }
                }
            }
        }
        for pi in 0..sets.len() {
            besov[pi].per_depth.push((depth, best_b[pi]));
            tl[pi].per_depth.push((depth, best_t[pi]));
        }
        let fallbacks: Vec<_> = ops.iter().map(|(k, op)| json!({"k": k, "degree_fallbacks": op.fallback_count()})).collect();
        extra.push(json!({"depth": depth, "max_trace_error": trace_err, "fallbacks": fallbacks}));
    }
    let d = base.d();
    let record = |name: &str, tallies: &[Tally]| {
        let mut ok = true;
        let mut max = None;
        let mut per_set = Vec::new();
        for (pr, t) in sets.iter().zip(tallies) {
            let (stable, _) = depth_change(t.per_depth[0].1, t.per_depth[1].1);
            ok &= stable && pr.check_trace(n, d).is_ok();
            max = max_opt(max, max_opt(t.per_depth[0].1, t.per_depth[1].1));
            per_set.push(json!({"params": pr, "stability": stability_json(&t.per_depth)}));
        }
        let vacuous = max.is_none();
        let details = json!({"functions": ROUNDTRIP_FUNCTIONS, "quadrature": quad, "grid": grid.size, "param_sets": per_set, "extension": extra});
        let status = if vacuous { Status::Vacuous } else { Status::of(ok && max.is_some_and(f64::is_finite)) };
        let w = tallies.iter().flat_map(|t| t.witnesses.iter().cloned()).collect();
        Record::new(name, status, max, details).with_witnesses(w)
    };
    let mut out = SuiteOutput::default();
    out.records.push(record("roundtrip_besov", &besov));
    out.records.push(record("roundtrip_tl", &tl));
    out.tables.push(table);
    out.plots.push(Plot::Decay { name: "roundtrip_decay".into(), title: "weighted scale terms, first cosine".into(), series });
    Ok(out)
}

/// Extension of the first cosine at the configured depth and params.
fn sample_field(ctx: &Ctx, salt: u64) -> Result<(std::rc::Rc<DSet>, Vec<f64>, ExtensionField<f64>)> {
    let s = ctx.set(ctx.depth())?;
    let f = cosine_corpus(s.n(), 1, ctx.seed(salt)).remove(0).on_atoms(&s);
    let grid = Grid::over(&ctx.cfg.grid.region()?, ctx.cfg.grid.resolution)?;
    let field = operator(&s, &grid, ctx.cfg.params.k, ctx.cfg.delta)?.apply(&f)?;
    Ok((s, f, field))
}

fn report_only(name: &str, rep: besov_trace::approx::CheckReport) -> SuiteOutput {
    SuiteOutput::record(Record::new(name, Status::ReportOnly, rep.max_ratio, rep.params).with_witnesses(rep.witnesses))
}

pub fn local_transfer(ctx: &Ctx) -> Result<SuiteOutput> {
    let (s, f, field) = sample_field(ctx, 13)?;
    let pr = &ctx.cfg.params;
    Ok(report_only("local_transfer", local_transfer_check(&field, &s, &f, pr.k, pr.u, 3, 8, 9)?))
}

pub fn damping(ctx: &Ctx) -> Result<SuiteOutput> {
    let (s, f, field) = sample_field(ctx, 14)?;
    let pr = &ctx.cfg.params;
    Ok(report_only("damping", damping_check(&field, &s, &f, pr.k, pr.u, &[1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0], 200, ctx.seed(15), 9)?))
}
