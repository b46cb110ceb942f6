use std::path::PathBuf;

/// Errors produced by construction gates, solvers and the study runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Incompatible dimensions between two objects.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    /// A matrix expected to be symmetric deviates beyond the gate tolerance.
    #[error(
        "matrix for {context} is not symmetric: relative Frobenius asymmetry {asymmetry:.3e} exceeds 1e-12"
    )]
    NotSymmetric { context: String, asymmetry: f64 },

    /// Cholesky factorization failed even after the one-shot jitter retry.
    #[error(
        "matrix for {context} is not positive definite: smallest eigenvalue {min_eigenvalue:.6e} \
         (jitter {jitter:.3e} already applied)"
    )]
    NotPositiveDefinite {
        context: String,
        min_eigenvalue: f64,
        jitter: f64,
    },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// Sample statistics need at least two draws.
    #[error("insufficient samples: got {count}, need at least {required}")]
    InsufficientSamples { count: usize, required: usize },

    /// A candidate index is out of range or repeated.
    #[error("invalid candidate index {index}: {reason}")]
    InvalidIndex { index: usize, reason: String },

    /// Exhaustive search would enumerate too many subsets.
    #[error("combinatorial budget exceeded: C({pool_size}, {k}) = {combinations} > {limit}")]
    BudgetExceeded {
        pool_size: usize,
        k: usize,
        combinations: u128,
        limit: u128,
    },

    /// Construction-time self-check failed (numerical breakdown).
    #[error("construction check failed for {context}: {detail}")]
    ConstructionCheck { context: String, detail: String },

    /// Configuration file could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure, annotated with the file involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }
}
