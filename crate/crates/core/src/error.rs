use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty (got {rows} rows, row lengths {cols:?})")]
    NotSquare { rows: usize, cols: Vec<usize> },

    #[error("|det A| = {det} must be at least 2")]
    SingularOrUnimodular { det: String },

    #[error("no exponent m <= {max_exponent} makes B^(-m) contract; best row norm reached was {achieved}")]
    NotExpansive { max_exponent: u32, achieved: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {n} exceeds the exact-geometry cap of {cap}")]
    DimensionCap { n: usize, cap: usize },

    #[error("order of the zero vector is unbounded")]
    ZeroVector,

    #[error("origin lies in the closure of {what}; finite dilation windows cannot be certified")]
    OriginInClosure { what: String },

    #[error("set is unbounded")]
    Unbounded,

    #[error("B^(-{j}) - I is singular, which cannot happen for a valid dilation matrix")]
    SingularShift { j: i32 },

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    #[error("seed search exhausted after {draws} draws")]
    SearchExhausted { draws: u32 },

    #[error("completion stalled at iteration {iteration}: translation residual {residual_translation}, dilation residual {residual_dilation}")]
    NoProgress { iteration: u32, residual_translation: String, residual_dilation: String },

    #[error("completion did not reach tolerance within {max_iter} iterations")]
    MaxIterations { max_iter: u32 },

    #[error("piece count {count} exceeds the limit {limit}")]
    PieceLimit { count: usize, limit: usize },

    #[error("completion invariant violated: {0}")]
    InvariantViolated(String),

    #[error("regions {first} and {second} overlap on a set of positive measure")]
    OverlapDetected { first: String, second: String },

    #[error("wavelet set is inexact (residuals {residual_translation}, {residual_dilation}); pass an explicit override to assemble anyway")]
    Inexact { residual_translation: String, residual_dilation: String },

    #[error("input is not a wavelet: {0}")]
    NotAWavelet(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
