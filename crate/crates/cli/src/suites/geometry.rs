use anyhow::Result;
use besov_trace::dset::audit_regularity;
use besov_trace::geometry::{
    build_shells, default_finest_level, default_region, estimate_porosity, near_set_family, porous_selection, shell_modulus, shell_violations,
    whitney_decompose,
};
use serde_json::json;

use super::Ctx;
use crate::report::{Record, Status, SuiteOutput};

pub fn whitney(ctx: &Ctx) -> Result<SuiteOutput> {
    let s = ctx.set(ctx.depth())?;
    let region = default_region(&s);
    let cover = whitney_decompose(&s, &region, default_finest_level(&s))?;
    let violations = cover.count_violations(&s);
    let details = json!({
        "depth": ctx.depth(),
        "cubes": cover.cubes.len(),
        "residual": cover.residual.len(),
        "top_level": cover.top_level,
        "min_level": cover.min_level,
        "violations": violations,
        "covered_volume": cover.covered_volume(),
        "residual_volume": cover.residual_volume,
        "region_volume": region.volume(),
    });
    let status = Status::of(violations == 0 && !cover.cubes.is_empty());
    Ok(SuiteOutput::record(Record::new("whitney", status, Some(cover.overlap_bound as f64), details)))
}

pub fn disjointness(ctx: &Ctx) -> Result<SuiteOutput> {
    let s = ctx.set(ctx.depth())?;
    let est = estimate_porosity(&s, 200, ctx.seed(2))?;
    // Holes of half-side ℓ(Q)/4κ must stay above the atom spacing.
    let level = ((1.0 / (4.0 * est.kappa * s.spacing())).log2().floor() as i32).max(0);
    let family = near_set_family(&s, 1.0, level)?;
    let sel = porous_selection(&family, &s, est.kappa)?;
    let audit = sel.audit(&s);
    let pairs = sel.disjointness_violations();
    let shells = build_shells(-10, 40);
    let shell_pairs = shell_violations(&shells);
    let details = json!({
        "depth": ctx.depth(),
        "kappa": est.kappa,
        "family_levels": level,
        "family_cubes": family.cubes.len(),
        "residue_modulus": sel.r0,
        "selection_violations": pairs.len(),
        "audit": audit,
        "shells": shells.len(),
        "shell_modulus": shell_modulus(),
        "shell_violations": shell_pairs.len(),
    });
    let witnesses = pairs
        .iter()
        .take(3)
        .map(|&(a, b)| json!({"r_q": [sel.assignment[a].1, sel.assignment[b].1]}))
        .chain(shell_pairs.iter().take(3).map(|p| json!({"shells": p})))
        .collect();
    let ok = audit.is_clean() && pairs.is_empty() && shell_pairs.is_empty();
    Ok(SuiteOutput::record(Record::new("disjointness", Status::of(ok), Some(est.kappa), details).with_witnesses(witnesses)))
}

pub fn regularity(ctx: &Ctx) -> Result<SuiteOutput> {
    let s = ctx.set(ctx.depth())?;
    let rep = audit_regularity(&s, 200, ctx.seed(11));
    let details = serde_json::to_value(&rep)?;
    Ok(SuiteOutput::record(Record::new("regularity", Status::ReportOnly, Some(rep.ratio), details)))
}
