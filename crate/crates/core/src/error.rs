use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-square matrix: row {row} has {found} entries, expected {expected}")]
    NonSquare {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric cell {token:?} at line {line}")]
    Parse { line: usize, token: String },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("matrix is not symmetric: max |A - A^T| = {max_dev:e} exceeds {tolerance:e}")]
    Asymmetric { max_dev: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("index {index} out of bounds for dimension {dim}")]
    IndexOutOfBounds { index: usize, dim: usize },

    #[error("duplicate index {0} in subset")]
    DuplicateIndex(usize),

    #[error("empty index set")]
    EmptySubset,

    #[error("singular submatrix (pivot {pivot:e} at position {position})")]
    SingularSubmatrix { position: usize, pivot: f64 },

    #[error("eigensolver failure: no convergence after {sweeps} sweeps")]
    EigenFailure { sweeps: usize },

    #[error("rank deficient: {positive} positive eigenvalues, need {required}")]
    RankDeficient { positive: usize, required: usize },

    #[error("combinatorial budget exceeded: {count} subsets > limit {limit}")]
    BudgetExceeded { count: u128, limit: u128 },

    #[error("unjittered tie between observations {first} and {second}; jitter the trace first")]
    UnjitteredTie { first: u64, second: u64 },

    #[error("empty trace")]
    EmptyTrace,

    #[error("too few tail observations: {found} < {required}")]
    TooFewExceedances { found: usize, required: usize },

    #[error("degenerate sample (variance {variance:e})")]
    DegenerateSample { variance: f64 },

    #[error("non-positive support after shift: {0}")]
    NonPositiveSupport(f64),

    #[error("optimizer did not converge after {evaluations} evaluations")]
    NonConvergence { evaluations: usize },

    #[error("malformed record in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
