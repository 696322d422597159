use std::path::PathBuf;

use crate::arch::{PeType, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("malformed {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("layer `{layer}`: invalid `{field}`: {message}")]
    InvalidLayer {
        layer: String,
        field: &'static str,
        message: String,
    },

    #[error("invalid network `{network}`: {message}")]
    InvalidNetwork { network: String, message: String },

    #[error("unknown network preset `{0}`")]
    UnknownPreset(String),

    #[error("configuration is infeasible: {}", join_violations(.0))]
    Infeasible(Vec<Violation>),

    #[error("invalid cost table: {0}")]
    InvalidCostTable(String),

    #[error("layer `{layer}` has {macs} MACs, above the oracle limit of {limit}")]
    OracleGuard { layer: String, macs: u64, limit: u64 },

    #[error("need at least {needed} samples for {folds}-fold cross-validation, got {got}")]
    InsufficientSamples {
        needed: usize,
        got: usize,
        folds: usize,
    },

    #[error("invalid regression parameter: {0}")]
    InvalidRegression(String),

    #[error("feature vector has length {got}, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("design matrix is rank deficient (rank {rank} of {columns} columns) and the minimum-norm fallback is disabled")]
    RankDeficient { rank: usize, columns: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("design space has {size} points, above the cap of {cap}")]
    GridCap { size: u128, cap: u64 },

    #[error("no feasible INT16 design point to normalize against")]
    NoInt16Baseline,

    #[error("metric `{0}` is not available on every feasible point")]
    MissingMetric(String),

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("accuracy table has no entry for ({network}, {pe_type})")]
    MissingAccuracy { network: String, pe_type: PeType },

    #[error("report schema: {0}")]
    Schema(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, message: impl Into<String>) -> Self {
        Error::Parse {
            what,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
