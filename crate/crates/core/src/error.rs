//! Error type shared by the whole crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A training set is unusable because one of the classes is empty.
    #[error("training set has no {0} rows")]
    EmptyClass(&'static str),

    /// Matrix/vector dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Input contains NaN or infinite entries.
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// Too few samples for the requested decomposition.
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Covariance has no positive eigenvalue (all rows identical).
    #[error("covariance is rank zero: all rows are identical")]
    RankZeroCovariance,

    /// A component-selection rule retained nothing.
    #[error("component selection retained no components: {0}")]
    NoComponentsSelected(String),

    /// Explicit component range lies outside the valid indices.
    #[error("component range {lo}..={hi} is outside the valid range 1..={max}")]
    ComponentRangeOutOfBounds { lo: usize, hi: usize, max: usize },

    /// Invalid cluster count for the available points.
    #[error("cluster count {k} is invalid for {points} points")]
    InvalidClusterCount { k: usize, points: usize },

    /// Clustering could not produce k nonempty nearest-centroid-consistent
    /// clusters (fewer than k distinct points).
    #[error("cannot form {k} nonempty clusters from the given points")]
    DegenerateClustering { k: usize },

    /// Combined covariance is singular and no ridge was applied.
    #[error("combined covariance is singular; use a nonzero ridge")]
    SingularCovariance,

    /// A cluster centroid is the zero vector, so the discriminant direction
    /// is undefined.
    #[error("cluster {0} has a zero centroid; discriminant is undefined")]
    ZeroCentroid(usize),

    /// Threshold list length must be 1 or k.
    #[error("expected 1 or {k} thresholds, got {got}")]
    BadThresholdCount { k: usize, got: usize },

    /// Model was built without fused vectors but the fused path was requested.
    #[error("model has no fused vectors; retrain with original-space clustering")]
    MissingFusedVectors,

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },

    /// Backing linear-algebra routine failed.
    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

impl Error {
    pub(crate) fn param(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            message: message.into(),
        }
    }
}
