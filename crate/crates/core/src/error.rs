use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}, column `{column}`: boolean value {value} outside {{0, 1}}")]
    InvalidBoolean {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("row {row}, column `{column}`: count value {value} is not a non-negative integer")]
    InvalidCount {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("not enough samples: {0}")]
    TooFewSamples(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("equivalence class has more than {cap} members")]
    TooManyExtensions { cap: usize },
    #[error("CPDAG admits no consistent extension")]
    NoExtension,
    #[error("graphs have different node sets")]
    NodeSetMismatch,
    #[error("dot parse error at line {line}: {message}")]
    Dot { line: usize, message: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("label shift epsilon {0} outside [0, 1]")]
    InvalidShift(f64),

    #[error("training data contains a single class")]
    SingleClass,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparameters(String),
    #[error("feature mismatch: {0}")]
    FeatureMismatch(String),

    #[error("no positives in sensitive group {group}")]
    NoPositivesInGroup { group: u8 },
    #[error("group {group} needs both positive and negative labels")]
    SingleClassGroup { group: u8 },
    #[error("unknown group value {0}")]
    UnknownGroup(f64),
    #[error("invalid intervention: {0}")]
    InvalidIntervention(String),

    #[error("no DAG in the equivalence class generates in-distribution data (best accept rate {best_rate:.3})")]
    UngeneratableDistribution { best_rate: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
