//! Generalized L_p discrepancy of weighted point sets: exact and numerical
//! evaluators, optimal importance-sampling densities, seeded experiments and
//! the associated constants.

// negated comparisons below are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod density;
pub mod discrepancy;
pub mod error;
pub mod experiments;
pub mod pointset;
pub mod quad;

pub use density::{optimal_density, Density1D, OptimalCurve};
pub use discrepancy::{DiscrepancyResult, Method};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentReport};
pub use pointset::{ProductDensity, WeightedPointSet};
