use anyhow::Result;
use besov_trace::approx::{build_projection, markov_check, near_best_check, remez_check, remez_line_degeneracy, reverse_holder_check, CheckReport, Exponent};
use besov_trace::Cube;
use besov_trace::trial_rng;
use rand::Rng;
use serde_json::json;

use super::{depth_change, max_opt, stability_json, Ctx};
use crate::corpus::standard_corpus;
use crate::report::{Record, Status, SuiteOutput, Table};

const TRIALS: usize = 500;
const DEGREE: usize = 3;

fn check_record(name: &str, reports: &[(u32, CheckReport)]) -> Record {
    let per_depth: Vec<(u32, Option<f64>)> = reports.iter().map(|(d, r)| (*d, r.max_ratio)).collect();
    let (stable, _) = depth_change(per_depth[0].1, per_depth[1].1);
    let max = max_opt(per_depth[0].1, per_depth[1].1);
    let status = if max.is_none() { Status::Vacuous } else { Status::of(stable) };
    let details = json!({
        "params": reports.iter().map(|(d, r)| json!({"depth": d, "params": r.params})).collect::<Vec<_>>(),
        "stability": stability_json(&per_depth),
    });
    let witnesses = reports.iter().flat_map(|(_, r)| r.witnesses.iter().cloned()).take(6).collect();
    Record::new(name, status, max, details).with_witnesses(witnesses)
}

pub fn remez(ctx: &Ctx) -> Result<SuiteOutput> {
    let base = ctx.set(ctx.depth())?;
    // Anchor at an atom so the same cubes hold atoms at every depth.
    let (a, _) = base.nearest(&base.bounding().center);
    let a = base.atom(a).to_vec();
    let q = Cube::new(a.clone(), 0.5)?;
    let qp = Cube::new(a, 0.25)?;
    let seed = ctx.seed(5);
    let (mut rz, mut rh, mut mk) = (Vec::new(), Vec::new(), Vec::new());
    for depth in ctx.depths() {
        let s = ctx.set(depth)?;
        rz.push((depth, remez_check(&s, &q, &qp, DEGREE, Exponent::One, Exponent::Two, TRIALS, seed)?));
        rh.push((depth, reverse_holder_check(&s, &q, DEGREE, Exponent::One, Exponent::Two, TRIALS, seed)?));
        mk.push((depth, markov_check(&s, &q, DEGREE, TRIALS, seed)?));
    }
    let mut out = SuiteOutput::default();
    out.records.push(check_record("remez", &rz));
    out.records.push(check_record("reverse_holder", &rh));
    out.records.push(check_record("markov", &mk));

    let deg = remez_line_degeneracy(&[1e-1, 1e-2, 1e-3, 1e-4], 64)?;
    let blow_up = deg.params["blow_up_observed"].as_bool().unwrap_or(false);
    out.records.push(Record::new("remez_degenerate", Status::of(blow_up), deg.max_ratio, deg.params.clone()).with_witnesses(deg.witnesses));
    Ok(out)
}

const CUBES: usize = 50;
const GRAM_TOL: f64 = 1e-10;
const REPR_TOL: f64 = 1e-8;

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

pub fn projection(ctx: &Ctx) -> Result<SuiteOutput> {
    let base = ctx.set(ctx.depth())?;
    let seed = ctx.seed(6);
    let mut rng = trial_rng(seed, 0);
    let cubes: Vec<Cube> = (0..CUBES)
        .map(|_| Cube::new(base.atom(rng.gen_range(0..base.len())).to_vec(), rng.gen_range(0.15..0.5)))
        .collect::<Result<_, _>>()?;
    let k = 2;
    let (mut gram, mut repr, mut reproduce) = (0.0f64, 0.0f64, 0.0f64);
    let mut table = Table::new("projection_near_best", &["depth", "cube", "function", "kind", "outcome", "ratio"]);
    let mut per_depth = Vec::new();
    let mut witnesses = Vec::new();
    let mut violations = 0usize;
    for depth in ctx.depths() {
        let s = ctx.set(depth)?;
        let corpus = standard_corpus(&base, 1, 10, seed);
        let fs: Vec<Vec<f64>> = corpus.iter().map(|f| f.on_atoms(&s)).collect();
        let mut best: Option<f64> = None;
        for (ci, q) in cubes.iter().enumerate() {
            let (proj, idx) = build_projection(&s, q, k)?;
            gram = gram.max(proj.gram_error);
            let space = proj.space.clone();
            for t in 0..3u64 {
                let mut r = trial_rng(seed, 1 + ci as u64 * 3 + t);
                let c: Vec<f64> = (0..space.dim()).map(|_| r.gen_range(-1.0..1.0)).collect();
                let vals: Vec<f64> = idx.iter().map(|&i| space.eval(&c, s.atom(i))).collect();
                repr = repr.max(rel_diff(&proj.apply(&vals).coeffs, &proj.apply_repr(&vals).coeffs));
                let back = proj.apply(&vals);
                let err = idx.iter().map(|&i| (back.eval(s.atom(i)) - space.eval(&c, s.atom(i))).abs()).fold(0.0, f64::max);
                reproduce = reproduce.max(err / c.iter().fold(1.0f64, |m, x| m.max(x.abs())));
            }
            for (fi, f) in fs.iter().enumerate() {
                let o = near_best_check(&s, q, 1, 1, f)?;
                let label = match o {
                    besov_trace::approx::CheckOutcome::Ratio { .. } => "ratio",
                    besov_trace::approx::CheckOutcome::Vacuous => "vacuous",
                    besov_trace::approx::CheckOutcome::Violation { .. } => {
                        violations += 1;
                        witnesses.push(json!({"depth": depth, "cube": ci, "function": fi, "outcome": o}));
                        "violation"
                    }
                };
                table.push([depth.to_string(), ci.to_string(), fi.to_string(), corpus[fi].kind().to_string(), label.to_string(), o.ratio().map_or(String::new(), |r| format!("{r:.6e}"))]);
                best = max_opt(best, o.ratio());
            }
        }
        per_depth.push((depth, best));
    }
    let (stable, _) = depth_change(per_depth[0].1, per_depth[1].1);
    let ok = gram <= GRAM_TOL && repr <= REPR_TOL && reproduce <= REPR_TOL && violations == 0 && stable;
    let details = json!({
        "k": k,
        "cubes": CUBES,
        "gram_error": gram,
        "repr_difference": repr,
        "reproduction_error": reproduce,
        "near_best": {"k": 1, "u": 1, "violations": violations, "stability": stability_json(&per_depth)},
    });
    let max = max_opt(per_depth[0].1, per_depth[1].1);
    let mut out = SuiteOutput::record(Record::new("projection", Status::of(ok), max, details).with_witnesses(witnesses.into_iter().take(5).collect()));
    out.tables.push(table);
    Ok(out)
}
