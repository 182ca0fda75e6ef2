//! Closed-form objectives and unbiased stochastic-gradient noise models.

mod catalog;
mod noise;
mod oracle;

pub use catalog::{catalog_lookup, eval_objective, CatalogParams, Objective, ObjectiveKind, CATALOG_NAMES};
pub use noise::{NoiseModel, SmoothnessConstants};
pub use oracle::{sample_gradient, StochasticOracle};
