use serde::Serialize;

use super::grid::SolverGrid;
use crate::error::{Error, Result};
use crate::rng::NormalStream;

/// Supplies the white-noise cell integrals `W([t_k, t_{k+1}) × [x_j, x_j + dx))`
/// for one time step, laid out as `[nx][d]`.
pub trait NoiseSource {
    fn fill_step(&self, k: usize, out: &mut [f64]);
    fn seed(&self) -> u64;
}

/// Noise generated on demand from the counter-based stream: step `k` uses
/// stream `k`, cell `(j, c)` is variate `j·d + c` of that stream.
#[derive(Debug, Clone, Copy)]
pub struct CounterNoise {
    pub seed: u64,
    scale: f64,
}

impl CounterNoise {
    pub fn new(grid: &SolverGrid, seed: u64) -> Self {
        CounterNoise {
            seed,
            scale: (grid.dt() * grid.dx()).sqrt(),
        }
    }
}

impl NoiseSource for CounterNoise {
    fn fill_step(&self, k: usize, out: &mut [f64]) {
        let mut s = NormalStream::new(self.seed, k as u64);
        for v in out.iter_mut() {
            *v = self.scale * s.next_normal();
        }
    }

    fn seed(&self) -> u64 {
        self.seed
    }
}

/// A fully materialized noise array `[nt][nx][d]` of `N(0, dt·dx)` variates.
#[derive(Debug, Clone, Serialize)]
pub struct NoiseRealization {
    pub seed: u64,
    pub nt: usize,
    pub nx: usize,
    pub d: usize,
    pub dt: f64,
    pub dx: f64,
    pub increments: Vec<f64>,
}

/// Materialize the counter-based noise for `grid`.
pub fn generate_noise(grid: &SolverGrid, d: usize, seed: u64) -> Result<NoiseRealization> {
    grid.validate()?;
    if d == 0 {
        return Err(Error::domain("dimension d must be at least 1"));
    }
    let src = CounterNoise::new(grid, seed);
    let row = grid.nx * d;
    let mut increments = vec![0.0; grid.nt * row];
    for (k, chunk) in increments.chunks_mut(row).enumerate() {
        src.fill_step(k, chunk);
    }
    Ok(NoiseRealization {
        seed,
        nt: grid.nt,
        nx: grid.nx,
        d,
        dt: grid.dt(),
        dx: grid.dx(),
        increments,
    })
}

impl NoiseRealization {
    #[inline]
    pub fn cell(&self, k: usize, j: usize, c: usize) -> f64 {
        self.increments[(k * self.nx + j) * self.d + c]
    }

    /// Sum `2 × 2` blocks of cells: the same Brownian sheet on a grid with
    /// `dt` and `dx` doubled.
    pub fn coarsen(&self) -> Result<NoiseRealization> {
        if self.nt % 2 != 0 || self.nx % 2 != 0 || self.nt < 8 || self.nx < 8 {
            return Err(Error::domain("noise array too small to coarsen"));
        }
        let (nt, nx, d) = (self.nt / 2, self.nx / 2, self.d);
        let mut inc = vec![0.0; nt * nx * d];
        for k in 0..nt {
            for j in 0..nx {
                for c in 0..d {
                    inc[(k * nx + j) * d + c] = self.cell(2 * k, 2 * j, c)
                        + self.cell(2 * k, 2 * j + 1, c)
                        + self.cell(2 * k + 1, 2 * j, c)
                        + self.cell(2 * k + 1, 2 * j + 1, c);
                }
            }
        }
        Ok(NoiseRealization {
            seed: self.seed,
            nt,
            nx,
            d,
            dt: 2.0 * self.dt,
            dx: 2.0 * self.dx,
            increments: inc,
        })
    }
}

impl NoiseSource for NoiseRealization {
    fn fill_step(&self, k: usize, out: &mut [f64]) {
        let row = self.nx * self.d;
        out.copy_from_slice(&self.increments[k * row..(k + 1) * row]);
    }

    fn seed(&self) -> u64 {
        self.seed
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Alpha;

    fn grid() -> SolverGrid {
        SolverGrid::new(Alpha::new(1.5).unwrap(), 1.0, 5.0, 16, 32).unwrap()
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_noise(&grid(), 2, 11).unwrap();
        let b = generate_noise(&grid(), 2, 11).unwrap();
        let c = generate_noise(&grid(), 2, 12).unwrap();
        assert_eq!(a.increments, b.increments);
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn cell_addressable_out_of_order() {
        let g = grid();
        let full = generate_noise(&g, 3, 5).unwrap();
        let scale = (g.dt() * g.dx()).sqrt();
        for (k, j, c) in [(15, 31, 2), (0, 0, 0), (7, 3, 1)] {
            let v = scale * crate::rng::normal_at(5, k as u64, (j * 3 + c) as u64);
            assert_eq!(v, full.cell(k, j, c));
        }
    }

    #[test]
    fn coarsening_preserves_totals() {
        let n = generate_noise(&grid(), 1, 2).unwrap();
        let c = n.coarsen().unwrap();
        let s1: f64 = n.increments.iter().sum();
        let s2: f64 = c.increments.iter().sum();
        assert!((s1 - s2).abs() < 1e-12);
        assert_eq!(c.nt, 8);
        assert_eq!(c.dx, 2.0 * n.dx);
    }
}
