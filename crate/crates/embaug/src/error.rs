use thiserror::Error;

/// Errors surfaced by every stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("dimension mismatch at line {line}: expected {expected}, found {found}")]
    LineDimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite vector entry at line {line}")]
    NonFiniteEntry { line: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("record {id}: label {label:?} is not in the declared class set")]
    UnknownLabel { id: String, label: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("class {label:?} has {count} records, need at least {needed}")]
    ClassTooSmall {
        label: String,
        count: usize,
        needed: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("LDA requires at least 2 classes, got {0}")]
    TooFewClasses(usize),

    #[error("no bracketed numeric list found in generated text")]
    NoNumericList,

    #[error("generated vector has {found} entries, expected {expected}")]
    GenerationDimensionMismatch { expected: usize, found: usize },

    #[error("generated vector contains a non-finite entry")]
    NonFiniteGeneration,

    #[error("generator exhausted retries for class {class:?} after {attempts} attempts: {last_error}")]
    GeneratorExhausted {
        class: String,
        attempts: usize,
        last_error: String,
    },

    #[error("transport failure after {attempts} attempts: {message}")]
    Transport { attempts: usize, message: String },

    #[error("authentication failure: environment variable {env_var} is not set")]
    MissingApiKey { env_var: String },

    #[error("class sets do not match: {0}")]
    ClassSetMismatch(String),

    #[error("prediction/truth length mismatch: {preds} vs {truth}")]
    LengthMismatch { preds: usize, truth: usize },

    #[error("empty test slice for shift value {0:?}")]
    EmptyShiftSlice(String),

    #[error("record {id} is missing metadata key {key:?}")]
    MissingMetadata { id: String, key: String },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("mixture weights sum to {0}, expected 1")]
    BadMixtureWeights(f64),

    #[error("coincident class means; boundary undefined")]
    CoincidentMeans,

    #[error("model/data mismatch: {0}")]
    ModelMismatch(String),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("io error: {0}")]
    Stream(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
