use num_complex::Complex64;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not a projective point")]
    NotAProjectivePoint,

    #[error("zero section")]
    ZeroSection,

    #[error("multi-index weight {got} does not match degree {expected}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("rule too coarse: degree {degree} < required {required}")]
    RuleTooCoarse { degree: usize, required: usize },

    #[error("metric/dimension mismatch")]
    MetricDimensionMismatch,

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("increase quadrature degree or reduce N (condition number {cond:.3e})")]
    IllConditionedGram { cond: f64 },

    #[error("gram matrix is not positive definite")]
    GramNotPositiveDefinite,

    #[error(
        "root iteration did not converge after {iterations} iterations \
         (worst residual {worst_residual:.3e})"
    )]
    RootsDidNotConverge {
        iterations: usize,
        worst_residual: f64,
        /// Best iterate available when the iteration stopped.
        best: Vec<Complex64>,
    },

    #[error("degenerate pair")]
    DegeneratePair,

    #[error("base locus")]
    BaseLocus,

    #[error("no density-one subsequence detectable at this length")]
    NoDensityOneSubsequence,

    #[error("cannot fit slope: need at least {required} degrees, got {got}")]
    CannotFitSlope { required: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
