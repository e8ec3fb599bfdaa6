//! Fractional-order (PI)^lambda control with a fractional Smith-like
//! predictor for high-order lag plants: rational approximation, closed-loop
//! simulation, objectives and multi-objective tuning.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod frac_tf;
pub mod metrics;
pub mod moga;
pub mod sim_engine;

pub use error::{Error, Result};
