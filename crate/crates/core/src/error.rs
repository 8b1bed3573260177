use std::path::PathBuf;

/// Everything that can go wrong across ingestion, training, prediction,
/// evaluation, and persistence. Variants are deliberately fine-grained so
/// callers (the CLI in particular) can map them to distinct failure classes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("duplicate column {0:?} in header")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("row {row}, column {column:?}: {value:?} is not numeric")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: missing value")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: no tokens (every feature value is missing)")]
    NoTokens { row: usize },
    #[error("feature name {0:?} is empty or contains the reserved separator")]
    BadFeatureName(String),
    #[error("value {value:?} for feature {feature:?} contains the reserved separator")]
    SeparatorInValue { feature: String, value: String },
    #[error("store corruption: {0}")]
    StoreCorruption(String),
    #[error("store holds no neurovectors")]
    EmptyStore,
    #[error("no prediction possible: {0}")]
    NoPrediction(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("split leaves the {part} partition empty ({rows} rows)")]
    EmptySplit { part: &'static str, rows: usize },
    #[error("{path}: model format version {found}, this build reads version {supported}")]
    VersionMismatch {
        path: PathBuf,
        found: u32,
        supported: u32,
    },
    #[error("{path}: checksum mismatch (file says {stored}, payload hashes to {computed})")]
    ChecksumMismatch {
        path: PathBuf,
        stored: String,
        computed: String,
    },
    #[error("{path}:{line}: malformed model file: {detail}")]
    MalformedModel {
        path: PathBuf,
        line: usize,
        detail: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("task mismatch: model is {model}, requested {requested}")]
    TaskMismatch { model: String, requested: String },
    #[error("evaluation needs at least one row")]
    EmptyEvaluation,
}

pub type Result<T> = std::result::Result<T, Error>;
