//! Vertical federated gradient boosting simulation with label-leakage
//! measurement, two leakage defenses, and a constrained NSGA-II search over
//! boosting hyperparameters.

pub mod attack;
pub mod cli;
pub mod data;
pub mod error;
pub mod moo;
pub mod optimizer;
pub mod secureboost;
pub mod seed;

pub use error::{Error, Result};
