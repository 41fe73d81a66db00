//! Fractional stochastic heat equations driven by space-time white noise:
//! kernel identities, a pseudo-spectral solver, sample-path statistics,
//! potential theory and hitting probabilities.

pub mod checks;
pub mod error;
pub mod hitting;
pub mod kernel;
pub mod potential;
pub mod quad;
pub mod rng;
pub mod spde;
pub mod stats;

pub use error::{Error, Result};
pub use kernel::{Alpha, ParabolicPoint};
pub use spde::{FieldSample, ModelSpec, Preset, Scheme, SolverGrid};
