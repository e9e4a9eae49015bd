use thiserror::Error;

/// Unified error type for the toolkit.
///
/// Variants are grouped by origin: configuration mistakes callers can fix
/// before touching data, data/shape problems discovered while reading or
/// combining inputs, and numeric degeneracies that only surface mid-run.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation before any computation ran.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Requested more clusters than there are records.
    #[error("cluster count {c} exceeds record count {n_records}")]
    InvalidClusterCount { c: usize, n_records: usize },

    /// The data cannot support the request (e.g. fewer distinct records
    /// than clusters to seed).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A cluster ended up with zero total membership weight.
    #[error("cluster {cluster} has zero membership weight")]
    EmptyCluster { cluster: usize },

    /// Matrix/vector dimensions do not line up.
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    /// A cell could not be parsed (CSV or PGM input).
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    /// The file parsed but its layout does not match the declared schema.
    #[error("schema error: {0}")]
    Schema(String),

    /// The operation needs ground-truth labels and the dataset has none.
    #[error("labels required for this operation")]
    LabelsRequired,

    /// A class name was requested that does not occur in the labels.
    #[error("unknown class: {0}")]
    UnknownClass(String),

    /// Every record was ambiguous, so accuracy over decided records is undefined.
    #[error("no decided records: accuracy is undefined when all records are ambiguous")]
    NoDecidedRecords,

    /// Fewer than two classes remain among decided records; G-mean is undefined.
    #[error("g-mean undefined: fewer than two classes among decided records")]
    DegenerateGMean,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
