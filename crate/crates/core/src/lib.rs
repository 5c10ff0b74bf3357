//! Bayesian workflow engine: prior predictive simulation, Hamiltonian Monte
//! Carlo with divergence diagnostics, posterior predictive checks, LOO-PIT
//! calibration, and PSIS-LOO pointwise model comparison, with every
//! diagnostic exported as machine-readable plot data.
//!
//! The numeric core is generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the aliases at the crate root pin the `f64`
//! instantiations the CLI works with.

pub mod data;
pub mod dist;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod ppc;
pub mod prior_pred;
pub mod psis;
pub mod real;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use data::Dataset;
pub use dist::{gpd_inv_cdf, DistSpec};
pub use error::{Error, Result};
pub use model::{ModelKind, ModelSpec, Parameterization, PriorConfig};
pub use real::Real;
pub use rng::RngStream;
pub use sampler::{run_chains, split_rhat, Draws, SamplerConfig};

/// `f64` instantiations used by the command-line tool.
pub type Dataset64 = Dataset<f64>;
pub type DistSpec64 = DistSpec<f64>;
pub type Draws64 = Draws<f64>;
pub type ModelSpec64 = ModelSpec<f64>;
pub type PriorConfig64 = PriorConfig<f64>;
pub type SamplerConfig64 = SamplerConfig<f64>;
