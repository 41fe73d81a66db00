use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge on [{lower}, {upper}]: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature {
        lower: f64,
        upper: f64,
        achieved: f64,
        requested: f64,
    },

    /// An iterative solver stopped at its iteration cap.
    #[error("{method} did not converge after {iterations} iterations (last gap {gap:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        gap: f64,
    },

    /// The time-stepper produced a non-finite state.
    #[error("simulation diverged at step {step} (t = {time})")]
    Diverged { step: usize, time: f64 },

    /// A trajectory in a batch failed.
    #[error("trajectory with seed {seed} failed: {source}")]
    Trajectory {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    /// A Monte Carlo run aborted before all trajectories completed.
    #[error("aborted after {completed} trajectories ({hits} hits): {source}")]
    Partial {
        completed: usize,
        hits: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of a numerical method (as opposed to bad input or i/o).
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Quadrature { .. } | Error::NonConvergence { .. } | Error::Diverged { .. } => true,
            Error::Trajectory { source, .. } | Error::Partial { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
