//! Random waves, Wick powers and cubic Klein-Gordon flows on the 3-torus,
//! computed pseudospectrally on ball-truncated Fourier lattices.

pub mod error;
pub mod random;
pub mod renorm;
pub mod solver;
pub mod spectral;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
