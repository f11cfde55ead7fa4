use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use besov_trace::dset::IfsSpec;
use besov_trace::extension::DEFAULT_DELTA;
use besov_trace::Cube;
use besov_trace::norms::{GridQuadrature, NormParams};
use serde::{Deserialize, Serialize};

/// Every suite the runner knows, in execution order.
pub const SUITES: &[&str] = &[
    "whitney",
    "disjointness",
    "hardy",
    "porous_summation",
    "remez",
    "projection",
    "norm_equivalence",
    "trace_identity",
    "roundtrip",
    "reference_oracle",
    "regularity",
    "local_transfer",
    "damping",
];

/// Suites whose parameters must satisfy `α > (n − d)/p`.
const TRACE_SUITES: &[&str] = &["trace_identity", "roundtrip"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: usize,
    pub center: Vec<f64>,
    pub half_side: f64,
    /// Grid norm sampling used by the round trip.
    #[serde(default = "default_quadrature")]
    pub quadrature: GridQuadrature,
}

fn default_quadrature() -> GridQuadrature {
    GridQuadrature { outer_stride: 8, inner_max: 17 }
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { resolution: 256, center: vec![0.5, 0.5], half_side: 1.5, quadrature: default_quadrature() }
    }
}

impl GridConfig {
    pub fn region(&self) -> Result<Cube> {
        Ok(Cube::new(self.center.clone(), self.half_side)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ifs: IfsSpec,
    pub params: NormParams,
    /// Parameter sets of the round trip; each must satisfy the trace condition.
    pub roundtrip_params: Vec<NormParams>,
    pub grid: GridConfig,
    pub delta: f64,
    pub seed: u64,
    pub suites: Vec<String>,
    pub output_dir: PathBuf,
}

fn params(alpha: f64, p: f64, k: usize, u: u32) -> NormParams {
    NormParams { alpha, p, q: p, u, k, j_min: 0, j_max: 4 }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            ifs: IfsSpec::four_corner(5),
            params: params(0.9, 2.0, 1, 1),
            roundtrip_params: vec![params(0.9, 2.0, 1, 1), params(1.4, 2.0, 2, 1), params(0.9, 1.5, 1, 1)],
            grid: GridConfig::default(),
            delta: DEFAULT_DELTA,
            seed: 0,
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                bail!("unknown suite {s:?}; known suites: {}", SUITES.join(", "));
            }
        }
        self.ifs.validate()?;
        if self.ifs.n() != self.grid.center.len() {
            bail!("grid region has dimension {} but the IFS lives in dimension {}", self.grid.center.len(), self.ifs.n());
        }
        self.params.validate()?;
        for p in &self.roundtrip_params {
            p.validate()?;
        }
        self.grid.quadrature.validate()?;
        self.grid.region()?;
        if self.grid.resolution < 16 {
            bail!("grid resolution must be at least 16, got {}", self.grid.resolution);
        }
        if self.delta.is_nan() || self.delta <= 0.0 {
            bail!("delta must be positive, got {}", self.delta);
        }
        if self.suites.iter().any(|s| TRACE_SUITES.contains(&s.as_str())) {
            let (n, d) = (self.ifs.n(), self.ifs.similarity_dimension());
            self.params.check_trace(n, d)?;
            for p in &self.roundtrip_params {
                p.check_trace(n, d)?;
            }
        }
        Ok(())
    }
}
