//! Extremality of the origin for random walks and Brownian samples in `R^n`,
//! spherical Brownian covering times, and Monte Carlo checks of the
//! associated closed-form probabilities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificates;
pub mod closedform;
pub mod error;
pub mod estimate;
pub mod experiments;
pub mod harness;
pub mod hull;
pub mod sphere;
pub mod stochastic;

pub use error::{Error, Result};
pub use estimate::EstimateCI;
