use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schema violation in field `{field}`: {reason}")]
    Schema { field: &'static str, reason: String },

    #[error("matrix `mu` is not symmetric at ({i}, {j}): {a} != {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("field `{field}` must hold integers (offending entry {index:?})")]
    NonInteger {
        field: &'static str,
        index: Option<usize>,
    },

    #[error("field `{field}` must be nonnegative (offending entry {index:?})")]
    Negative {
        field: &'static str,
        index: Option<usize>,
    },

    #[error("no bitstring satisfies the linear constraint (budget {budget})")]
    Infeasible { budget: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter count mismatch: expected {expected}, found {found}")]
    ParamCount { expected: usize, found: usize },

    #[error("instance with {n} qubits exceeds the enumeration limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("approximation ratio undefined for E0 = 0")]
    UndefinedRatio,

    #[error("summary is empty")]
    EmptySummary,

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
