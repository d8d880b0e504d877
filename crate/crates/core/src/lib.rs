//! Ruin and survival numerics for one-dimensional Lévy processes killed on
//! leaving a finite union of intervals.

mod error;
mod measure;

pub mod expm;
pub mod kernel;
pub mod levy;
pub mod montecarlo;
pub mod operator;
pub mod quad;
pub mod spectral;

pub use error::{LevyError, Result};
pub use measure::TailDecay;
