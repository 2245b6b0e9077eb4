//! Experiment drivers: coupled-seed convergence ladders, triviality pairings,
//! Monte Carlo and analysis checks, and their on-disk outputs.

pub mod analysis;
pub mod checks;
pub mod config;
pub mod convergence;
pub mod error;
pub mod output;
pub mod triviality;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
