use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unclassifiable measure: {0}")]
    UnclassifiableMeasure(String),

    #[error("symbol integration failure at z = {z}: {detail}")]
    SymbolIntegration { z: f64, detail: String },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("non-integrable tail function near zero: {0}")]
    NonIntegrableKernel(String),

    #[error("truncation radius {radius} too small: {detail}")]
    TruncationRadius { radius: f64, detail: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("grid too coarse: interval [{a}, {b}] gets {interior} interior nodes (need at least 4)")]
    GridTooCoarse { a: f64, b: f64, interior: usize },

    #[error("kernel table does not cover offset {offset} (radius {radius})")]
    TableCoverage { offset: f64, radius: f64 },

    #[error("generator not invertible on grid (condition estimate {condition:e})")]
    SingularGenerator { condition: f64 },

    #[error("dominance failure: power iteration did not converge in {iterations} iterations")]
    DominanceFailure { iterations: usize },

    #[error("point {0} lies outside the domain")]
    OutsideDomain(f64),

    #[error("matrix exponential overflow: {0}")]
    ExponentialOverflow(String),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("unsupported simulation scheme: {0}")]
    Configuration(String),

    #[error("decay-rate fit failed: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, LevyError>;
