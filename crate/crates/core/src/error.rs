//! Error type shared by every module of the crate.

/// Errors raised by table ingestion, estimation, and embedding operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(String),

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("csv has a header but no data rows")]
    NoDataRows,

    #[error("column {column}: {reason} (enable drop_incomplete to exclude such columns)")]
    IncompleteColumn { column: String, reason: String },

    #[error("table has {0} usable columns, at least 2 required")]
    TooFewColumns(usize),

    #[error("duplicate column name {0:?}")]
    DuplicateName(String),

    #[error("empty column name at position {0}")]
    EmptyName(usize),

    #[error("column {0:?} has a different length from the first column")]
    UnequalColumnLength(String),

    #[error("non-finite value in column {0:?}")]
    NonFiniteValue(String),

    #[error("column {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("series of length {len} is too short for {n_f}-point segments, need at least {min}")]
    SeriesTooShort { len: usize, n_f: usize, min: usize },

    #[error("frequency bin {bin} out of range, tensor has {n_f} bins")]
    BinOutOfRange { bin: usize, n_f: usize },

    #[error("sample-count mismatch: {0} vs {1} rows")]
    RowCountMismatch(usize, usize),

    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("spectral shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("fraction q must lie in (0, 1], got {0}")]
    InvalidFraction(f64),

    #[error("empty frequency set")]
    EmptyFrequencySet,

    #[error("matrix is not square: {rows} rows, {cols} columns")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),

    #[error("invalid matrix entry at ({i}, {j}): {what}")]
    InvalidEntry { i: usize, j: usize, what: String },

    #[error("all off-diagonal similarities are zero")]
    AllZeroSimilarities,

    #[error("entry ({i}, {j}) = {value} is outside [0, 1]; normalize the matrix first")]
    NotNormalized { i: usize, j: usize, value: f64 },

    #[error("embedding dimension {d} out of range for {m} points")]
    DimensionOutOfRange { d: usize, m: usize },

    #[error("eigendecomposition did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("lag {lag} out of range for series of length {len}")]
    LagOutOfRange { lag: usize, len: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
