use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("index {index} is below the admissible range (minimum {minimum})")]
    NegativeIndex { index: i64, minimum: i64 },

    #[error("index {index} exceeds the finite support cutoff {cutoff}")]
    IndexBeyondSupport { index: i64, cutoff: usize },

    #[error("recurrence coefficient a_{index} = {value} is not strictly positive")]
    NonPositiveCoefficient { index: i64, value: f64 },

    #[error("leading coefficient of degree {degree} leaves the representable range")]
    Overflow { degree: usize },

    #[error("eigensolver did not converge for eigenvalue {index} after {iterations} sweeps (residual {residual:e})")]
    EigenNoConvergence {
        index: usize,
        iterations: usize,
        residual: f64,
    },

    #[error(
        "continued fraction not converged at depth {depth}: last convergents {last} and {previous}"
    )]
    FractionNoConvergence {
        depth: usize,
        last: Complex64,
        previous: Complex64,
    },

    #[error("quadrature did not settle: {size} nodes give {last}, half as many give {previous}")]
    QuadratureNoConvergence {
        size: usize,
        last: f64,
        previous: f64,
    },

    #[error(
        "denominator 1 - a0^2 p0 q0 = {value} is degenerate; z = {z} is too close to the spectrum"
    )]
    DegenerateDenominator { z: Complex64, value: Complex64 },

    #[error("singular resolvent system at row {row} for z = {z}")]
    SingularSystem { z: Complex64, row: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("limit does not exist or is degenerate: {0}")]
    DegenerateLimit(String),

    #[error("no matrix measure configured for this limit")]
    MeasureUnavailable,
}

pub type Result<T> = std::result::Result<T, Error>;
