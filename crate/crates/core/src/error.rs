use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("similarity dimension {d:.6} is outside the admissible interval ({lo}, {hi})")]
    Dimension { d: f64, lo: f64, hi: f64 },

    #[error("open-set condition violated: first-generation images {first} and {second} overlap")]
    OpenSetCondition { first: usize, second: usize },

    #[error("porosity failure: {0}")]
    Porosity(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("cube contains no support points")]
    EmptySupport,

    #[error("IRLS did not converge in {iterations} iterations (best value {best})")]
    Convergence { iterations: usize, best: f64 },

    #[error("degenerate geometry: polynomial space of dimension {dim} has numerical rank {rank} on the support")]
    DegenerateGeometry { rank: usize, dim: usize },

    #[error("inconsistent approximation values: {0}")]
    Inconsistent(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
