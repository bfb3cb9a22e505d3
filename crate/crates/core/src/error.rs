use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot parse strategy `{name}`: unexpected token `{token}`")]
    StrategyParse { name: String, token: String },

    #[error("{field} = {value} is outside its domain {domain}")]
    Domain {
        field: &'static str,
        value: String,
        domain: &'static str,
    },

    #[error("population size {population} is too small for {differences} difference pair(s); need at least {required}")]
    PopulationTooSmall {
        population: usize,
        differences: usize,
        required: usize,
    },

    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("objective returned non-finite value {value} for row {row}")]
    NonFinite { row: usize, value: f64 },

    #[error("evaluation of `{problem}` failed at generation {generation}, row {row}: value {value}")]
    Evaluation {
        problem: String,
        generation: u64,
        row: usize,
        value: f64,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("budget too small: {0}; increase the budget")]
    BudgetTooSmall(String),

    #[error("metric is undefined: {0}")]
    UndefinedMetric(&'static str),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("cannot parse config file: {0}")]
    ConfigFile(#[from] toml::de::Error),

    #[error("cannot build worker pool: {0}")]
    WorkerPool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
