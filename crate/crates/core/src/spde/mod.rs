//! Pseudo-spectral simulation of the mild solution on a periodic torus.

mod batch;
mod coefficients;
mod grid;
pub mod io;
mod noise;
mod solver;

pub use batch::{
    batch_map, batch_solve, refinement_ladder, truncation_sensitivity, FieldSummary, LadderLevel, TruncationReport,
};
pub use coefficients::{CoefficientSet, Preset};
pub use grid::SolverGrid;
pub use noise::{generate_noise, CounterNoise, NoiseRealization, NoiseSource};
pub use solver::{
    run, scheme_variance, solve, solve_additive_exact, solve_with_noise, FieldSample, ModelSpec, Scheme,
};
