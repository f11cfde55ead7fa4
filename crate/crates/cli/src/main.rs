use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use besov_trace::dset::{audit_regularity, build_dset, write_atoms_csv};
use besov_trace::extension::{extend, trace};
use besov_trace::geometry::Grid;
use besov_trace::norms::besov_norm_on_set;
use besov_trace::DSet;
use besov_trace_cli::config::ExperimentConfig;
use besov_trace_cli::corpus::{cosine_corpus, standard_corpus};
use besov_trace_cli::report::{write_outputs, Plot, SuiteReport, Table};
use besov_trace_cli::suites;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "besov-trace", version, about = "Function spaces on d-sets: norms, extension and trace checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suites to run (repeatable); replaces the config list.
    #[arg(long = "suite", global = true)]
    suites: Vec<String>,
    /// IFS depth.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Grid points per axis.
    #[arg(long, global = true)]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the set, write its atoms and a regularity audit.
    BuildSet,
    /// Besov norms of the standard corpus on the set.
    Norms,
    /// Extend one cosine test function to the grid and trace it back.
    Extend {
        /// Index into the cosine corpus.
        #[arg(long, default_value_t = 0)]
        function: usize,
        /// Write little-endian f64 values with a JSON sidecar instead of CSV.
        #[arg(long)]
        binary: bool,
    },
    /// Run the configured suites and write report.json, tables and plots.
    Verify,
    /// Run only the round-trip suite.
    Roundtrip,
    /// Print the summary of an existing report.json.
    Report,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if !self.suites.is_empty() {
            cfg.suites = self.suites.clone();
        }
        if let Some(d) = self.depth {
            cfg.ifs.depth = d;
        }
        if let Some(g) = self.grid {
            cfg.grid.resolution = g;
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(cfg.output_dir.clone())
}

fn build_set(cfg: &ExperimentConfig) -> Result<DSet> {
    cfg.ifs.validate()?;
    Ok(build_dset(&cfg.ifs)?)
}

fn cmd_build_set(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let s = build_set(cfg)?;
    let dir = out_dir(cfg)?;
    write_atoms_csv(&s, fs::File::create(dir.join("atoms.csv"))?)?;
    let rep = audit_regularity(&s, 200, cfg.seed);
    fs::write(dir.join("regularity.json"), serde_json::to_string_pretty(&rep)?)?;
    println!("{} atoms, spacing {:.3e}, regularity ratio {:.3}", s.len(), s.spacing(), rep.ratio);
    Ok(ExitCode::SUCCESS)
}

fn cmd_norms(cfg: &ExperimentConfig) -> Result<ExitCode> {
    cfg.params.validate()?;
    let s = build_set(cfg)?;
    let corpus = standard_corpus(&s, cfg.params.k, 10, cfg.seed);
    let mut table = Table::new("norms", &["function", "kind", "j", "weighted"]);
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for (i, f) in corpus.iter().enumerate() {
        let r = besov_norm_on_set(&f.on_atoms(&s), &s, &cfg.params, false)?;
        for (j, v) in &r.per_scale {
            table.push([i.to_string(), f.kind().to_string(), j.to_string(), format!("{v:.6e}")]);
        }
        series.push((format!("{i} {}", f.kind()), r.per_scale.iter().map(|(j, v)| (*j as f64, *v)).collect()));
        rows.push(json!({"function": f.describe(), "total": r.total, "lp_part": r.lp_part, "seminorm_part": r.seminorm_part, "per_scale": r.per_scale, "unconverged": r.unconverged}));
        println!("{i:>2} {:<8} {:.6e}", f.kind(), r.total);
    }
    let dir = out_dir(cfg)?;
    fs::write(dir.join("norms.json"), serde_json::to_string_pretty(&json!({"params": cfg.params, "depth": cfg.ifs.depth, "norms": rows}))?)?;
    table.write(&dir.join("norms.csv"))?;
    let plot = Plot::Decay { name: "norms".into(), title: "weighted scale terms on the set".into(), series };
    fs::write(dir.join("norms.svg"), plot.render())?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_extend(cfg: &ExperimentConfig, function: usize, binary: bool) -> Result<ExitCode> {
    cfg.validate()?;
    let s = build_set(cfg)?;
    let f = cosine_corpus(s.n(), function + 1, cfg.seed).remove(function);
    let vals = f.on_atoms(&s);
    let grid = Grid::over(&cfg.grid.region()?, cfg.grid.resolution)?;
    let field = extend(&vals, &s, cfg.params.k, cfg.delta, &grid)?;
    let h = grid.step;
    let tr = trace(&grid, &field.values, &s, &[4.0 * h, 2.0 * h])?;
    let err = tr.values.iter().zip(&vals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let fallbacks = field.flags.iter().filter(|&&fl| fl & (besov_trace::extension::flags::NEAREST_ATOM | besov_trace::extension::flags::DEGREE_FALLBACK) != 0).count();
    let dir = out_dir(cfg)?;
    if binary {
        field.write_binary(&dir.join("field.bin"), &dir.join("field.json"))?;
    } else {
        field.write_csv(&dir.join("field.csv"))?;
    }
    let summary = json!({"function": f.describe(), "k": cfg.params.k, "grid": grid.size, "trace_max_error": err, "fallback_points": fallbacks});
    fs::write(dir.join("extend.json"), serde_json::to_string_pretty(&summary)?)?;
    println!("trace error {err:.3e}, fallback points {fallbacks}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let out = suites::run(cfg)?;
    let dir = out_dir(cfg)?;
    write_outputs(&dir, &out.report, &out.tables, &out.plots)?;
    print!("{}", out.report.summary());
    Ok(if out.report.failed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn cmd_report(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let report = SuiteReport::load(&cfg.output_dir.join("report.json"))?;
    print!("{}", report.summary());
    Ok(if report.failed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = cli.common.config()?;
    match cli.command {
        Command::BuildSet => cmd_build_set(&cfg),
        Command::Norms => cmd_norms(&cfg),
        Command::Extend { function, binary } => cmd_extend(&cfg, function, binary),
        Command::Verify => cmd_verify(&cfg),
        Command::Roundtrip => {
            cfg.suites = vec!["roundtrip".into()];
            cmd_verify(&cfg)
        }
        Command::Report => cmd_report(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
