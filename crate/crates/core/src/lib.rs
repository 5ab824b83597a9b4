//! Lazy quantum measurement engine.
//!
//! The engine maps onto a discrete run-and-tumble walk: the work index `n`
//! is the position and the qubit tag is the velocity. This crate provides
//! exact generating-function analytics, numerical coefficient extraction,
//! Monte Carlo simulation, first-passage statistics and power optimization.

pub mod cli;
pub mod energetics;
pub mod error;
pub mod first_passage;
pub mod moments;
pub mod montecarlo;
pub mod params;
pub mod propagators;
pub mod transforms;

pub use error::{Error, Result};
pub use params::{EngineParams, QubitTag};
