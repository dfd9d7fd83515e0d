use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch at {what} {index}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("data set must contain at least one point")]
    EmptyDataSet,

    #[error("weight of point {index} must be positive and finite, got {value}")]
    BadWeight { index: usize, value: f64 },

    #[error("coordinate {coord} of point {index} is not finite")]
    NonFinite { index: usize, coord: usize },

    #[error("clustering entry ({cluster}, {point}) is negative or not finite: {value}")]
    NegativeAssignment {
        cluster: usize,
        point: usize,
        value: f64,
    },

    #[error("column {point} of the clustering sums to {sum}, expected 1")]
    ColumnSum { point: usize, sum: f64 },

    #[error("cluster index {index} out of range for k = {k}")]
    ClusterIndex { index: usize, k: usize },

    #[error("bounds for cluster {cluster} are invalid: lower {lower}, upper {upper}")]
    BadBounds {
        cluster: usize,
        lower: f64,
        upper: f64,
    },

    #[error(
        "weight bounds infeasible: sum of lower bounds {sum_lower}, total weight {total}, \
         sum of upper bounds {sum_upper}"
    )]
    InfeasibleBounds {
        sum_lower: f64,
        total: f64,
        sum_upper: f64,
    },

    #[error("matrix {index} is not symmetric positive definite ({reason})")]
    NotPositiveDefinite { index: usize, reason: String },

    #[error("sites {first} and {second} coincide")]
    CoincidentSites { first: usize, second: usize },

    #[error("merging function is inconsistent: {0}")]
    BadMerge(String),

    #[error("parameter {name} out of range: {value}")]
    Parameter { name: &'static str, value: f64 },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("network simplex failed: {0}")]
    Solver(String),

    #[error(
        "no strictly compatible diagram after {attempts} attempts; cells {first} and {second} \
         share {shared} data points"
    )]
    Degenerate {
        attempts: usize,
        first: usize,
        second: usize,
        shared: usize,
    },

    #[error("{0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
