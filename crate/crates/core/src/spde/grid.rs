use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, Alpha};

/// Space-time grid on `[0, T] × [-L, L)` with periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverGrid {
    pub alpha: Alpha,
    pub horizon: f64,
    pub half_width: f64,
    pub nt: usize,
    pub nx: usize,
}

impl SolverGrid {
    pub fn new(alpha: Alpha, horizon: f64, half_width: f64, nt: usize, nx: usize) -> Result<Self> {
        let g = SolverGrid {
            alpha,
            horizon,
            half_width,
            nt,
            nx,
        };
        g.validate()?;
        Ok(g)
    }

    /// Re-check the invariants, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::domain(format!(
                "half-width must be positive, got {}",
                self.half_width
            )));
        }
        if self.nt < 4 || self.nx < 4 {
            return Err(Error::domain(format!(
                "degenerate grid: nt = {}, nx = {} (both must be >= 4)",
                self.nt, self.nx
            )));
        }
        if !self.nx.is_power_of_two() {
            return Err(Error::domain(format!("nx must be a power of two, got {}", self.nx)));
        }
        Ok(())
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    #[inline]
    pub fn position(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    /// Index of the node at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.nx / 2
    }

    /// Nearest node index to `x`, if `x` lies in `[-L, L)`.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        if x < -self.half_width || x >= self.half_width {
            return None;
        }
        let j = ((x + self.half_width) / self.dx()).round() as usize;
        Some(j.min(self.nx - 1))
    }

    /// Nearest time index to `t`, if `t ∈ [0, T]`.
    pub fn step_index(&self, t: f64) -> Option<usize> {
        if t < 0.0 || t > self.horizon * (1.0 + 1e-12) {
            return None;
        }
        Some(((t / self.dt()).round() as usize).min(self.nt))
    }

    /// `|λ_k|` for the discrete Fourier modes in FFT order, `λ_k = πk/L`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.nx as i64;
        (0..n)
            .map(|k| {
                let kk = if k <= n / 2 { k } else { k - n };
                PI * kk.abs() as f64 / self.half_width
            })
            .collect()
    }

    /// `|λ_k|^α` in FFT order.
    pub fn symbol(&self) -> Vec<f64> {
        let a = self.alpha.value();
        self.wavenumbers().into_iter().map(|l| l.powf(a)).collect()
    }

    /// Bound on the kernel mass outside `[-L, L]` at the horizon.
    pub fn tail_deficit(&self) -> Result<f64> {
        kernel::tail_mass_bound(self.alpha, self.horizon, self.half_width)
    }

    /// Reject grids whose truncation torus is too narrow for `tolerance`.
    pub fn check_truncation(&self, tolerance: f64) -> Result<()> {
        let deficit = self.tail_deficit()?;
        if deficit > tolerance {
            return Err(Error::domain(format!(
                "torus half-width {} leaves kernel mass {:.3e} outside at T = {}, above tolerance {:.1e}",
                self.half_width, deficit, self.horizon, tolerance
            )));
        }
        Ok(())
    }

    /// Same torus, `dt` and `dx` halved.
    pub fn refined(&self) -> Self {
        SolverGrid {
            nt: self.nt * 2,
            nx: self.nx * 2,
            ..*self
        }
    }

    /// Same resolution on a torus of twice the width.
    pub fn widened(&self) -> Self {
        SolverGrid {
            half_width: self.half_width * 2.0,
            nx: self.nx * 2,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> Alpha {
        Alpha::new(2.0).unwrap()
    }

    #[test]
    fn rejects_degenerate() {
        assert!(SolverGrid::new(a2(), 1.0, 10.0, 3, 64).is_err());
        assert!(SolverGrid::new(a2(), 1.0, 10.0, 8, 2).is_err());
        assert!(SolverGrid::new(a2(), 1.0, 10.0, 8, 100).is_err());
        assert!(SolverGrid::new(a2(), 0.0, 10.0, 8, 64).is_err());
        assert!(SolverGrid::new(a2(), 1.0, -1.0, 8, 64).is_err());
    }

    #[test]
    fn spacing_and_nodes() {
        let g = SolverGrid::new(a2(), 2.0, 4.0, 8, 16).unwrap();
        assert_eq!(g.dt(), 0.25);
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.position(g.origin_index()), 0.0);
        assert_eq!(g.node_index(0.0), Some(8));
        assert_eq!(g.node_index(4.0), None);
        assert_eq!(g.step_index(2.0), Some(8));
    }

    #[test]
    fn wavenumbers_fft_order() {
        let g = SolverGrid::new(a2(), 1.0, PI, 4, 8).unwrap();
        assert_eq!(g.wavenumbers(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn truncation_check() {
        let g = SolverGrid::new(a2(), 1.0, 20.0, 8, 64).unwrap();
        assert!(g.check_truncation(1e-3).is_ok());
        let g = SolverGrid::new(Alpha::new(1.2).unwrap(), 1.0, 2.0, 8, 64).unwrap();
        assert!(g.check_truncation(1e-3).is_err());
    }
}
