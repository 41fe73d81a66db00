//! Exponential-integrator spectral solver on the periodic torus.
//!
//! One step of the default scheme maps `u` to
//! `F⁻¹[e^{-dt|λ|^α} F(u + b(u) dt + σ(u) ξ / dx)]`, where `ξ` are the white
//! noise cell integrals of the step: nonlinearity and noise are applied in
//! physical space, then the semigroup acts on the Fourier modes.
//!
//! The exact-convolution variant keeps the drift term as above but convolves
//! the noise with the semigroup over the step exactly, scaling its Fourier
//! modes by `sqrt(v_k/dt)` with `v_k = (1 - e^{-2dt|λ_k|^α}) / (2|λ_k|^α)`.
//! For additive noise this is exact in law at every grid time.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::coefficients::{CoefficientSet, Preset};
use super::grid::SolverGrid;
use super::noise::{CounterNoise, NoiseSource};
use crate::error::{Error, Result};
use crate::kernel::Alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Noise added in physical space before the semigroup step.
    #[default]
    Walsh,
    /// Noise convolved with the semigroup exactly over each step.
    ExactConvolution,
}

/// The SPDE instance minus its grid: dimension, coefficients, time stepper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub d: usize,
    pub preset: Preset,
    #[serde(default)]
    pub scheme: Scheme,
}

impl ModelSpec {
    pub fn new(d: usize, preset: Preset) -> Self {
        ModelSpec {
            d,
            preset,
            scheme: Scheme::Walsh,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn coefficients(&self) -> Result<CoefficientSet> {
        CoefficientSet::new(self.preset, self.d)
    }
}

/// One solution trajectory, values laid out `[nt + 1][nx][d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub grid: SolverGrid,
    pub d: usize,
    pub preset: String,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl FieldSample {
    #[inline]
    pub fn value(&self, k: usize, j: usize, c: usize) -> f64 {
        self.values[(k * self.grid.nx + j) * self.d + c]
    }

    /// All nodes at time step `k`, `[nx][d]`.
    pub fn row(&self, k: usize) -> &[f64] {
        let w = self.grid.nx * self.d;
        &self.values[k * w..(k + 1) * w]
    }

    /// `u(t_k, x_j)` as a `d`-vector.
    pub fn point(&self, k: usize, j: usize) -> &[f64] {
        let i = (k * self.grid.nx + j) * self.d;
        &self.values[i..i + self.d]
    }

    pub fn steps(&self) -> usize {
        self.grid.nt + 1
    }
}

struct Stepper {
    nx: usize,
    d: usize,
    dt: f64,
    dx: f64,
    scheme: Scheme,
    coeffs: CoefficientSet,
    decay: Vec<f64>,
    noise_gain: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    nbuf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    xi: Vec<f64>,
    sig: Vec<f64>,
    drf: Vec<f64>,
}

impl Stepper {
    fn new(model: &ModelSpec, grid: &SolverGrid) -> Result<Self> {
        let coeffs = model.coefficients()?;
        let nx = grid.nx;
        let d = model.d;
        let dt = grid.dt();
        let sym = grid.symbol();
        // the 1/nx of the inverse transform is folded into both multipliers
        let norm = 1.0 / nx as f64;
        let decay = sym.iter().map(|&s| (-dt * s).exp() * norm).collect();
        let noise_gain = sym
            .iter()
            .map(|&s| {
                let v = if s * dt < 1e-300 {
                    dt
                } else {
                    -(-2.0 * dt * s).exp_m1() / (2.0 * s)
                };
                (v / dt).sqrt() * norm
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nx);
        let inv = planner.plan_fft_inverse(nx);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Ok(Stepper {
            nx,
            d,
            dt,
            dx: grid.dx(),
            scheme: model.scheme,
            coeffs,
            decay,
            noise_gain,
            fwd,
            inv,
            buf: vec![Complex::default(); nx],
            nbuf: vec![Complex::default(); nx],
            scratch: vec![Complex::default(); scratch_len],
            xi: vec![0.0; nx * d],
            sig: vec![0.0; nx * d],
            drf: vec![0.0; nx * d],
        })
    }

    fn step(&mut self, u: &mut [f64], noise: &dyn NoiseSource, k: usize) {
        let (nx, d) = (self.nx, self.d);
        noise.fill_step(k, &mut self.xi);
        for j in 0..nx {
            let node = &u[j * d..(j + 1) * d];
            self.coeffs.sigma_diag(node, &mut self.sig[j * d..(j + 1) * d]);
            self.coeffs.drift(node, &mut self.drf[j * d..(j + 1) * d]);
        }
        let inv_dx = 1.0 / self.dx;
        for c in 0..d {
            match self.scheme {
                Scheme::Walsh => {
                    for j in 0..nx {
                        let i = j * d + c;
                        let w = u[i] + self.drf[i] * self.dt + self.sig[i] * self.xi[i] * inv_dx;
                        self.buf[j] = Complex::new(w, 0.0);
                    }
                    self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
                    for (z, &m) in self.buf.iter_mut().zip(&self.decay) {
                        *z *= m;
                    }
                }
                Scheme::ExactConvolution => {
                    // pack the deterministic part and the noise into one complex transform
                    for j in 0..nx {
                        let i = j * d + c;
                        let w = u[i] + self.drf[i] * self.dt;
                        let n = self.sig[i] * self.xi[i] * inv_dx;
                        self.nbuf[j] = Complex::new(w, n);
                    }
                    self.fwd.process_with_scratch(&mut self.nbuf, &mut self.scratch);
                    for m in 0..nx {
                        let z = self.nbuf[m];
                        let zc = self.nbuf[(nx - m) % nx].conj();
                        let a = (z + zc) * 0.5;
                        let b = (z - zc) * Complex::new(0.0, -0.5);
                        self.buf[m] = a * self.decay[m] + b * self.noise_gain[m];
                    }
                }
            }
            self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);
            for j in 0..nx {
                u[j * d + c] = self.buf[j].re;
            }
        }
    }
}

/// Run the time stepper, handing every time row `[nx][d]` (including the
/// zero initial row) to `observer` without retaining the trajectory.
pub fn run<O: FnMut(usize, &[f64])>(
    model: &ModelSpec,
    grid: &SolverGrid,
    noise: &dyn NoiseSource,
    mut observer: O,
) -> Result<()> {
    grid.validate()?;
    let mut stepper = Stepper::new(model, grid)?;
    let mut u = vec![0.0; grid.nx * model.d];
    observer(0, &u);
    for k in 0..grid.nt {
        stepper.step(&mut u, noise, k);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                step: k + 1,
                time: grid.time(k + 1),
            });
        }
        observer(k + 1, &u);
    }
    Ok(())
}

/// Solve with an explicit noise source.
pub fn solve_with_noise(model: &ModelSpec, grid: &SolverGrid, noise: &dyn NoiseSource) -> Result<FieldSample> {
    let row = grid.nx * model.d;
    let mut values = Vec::with_capacity((grid.nt + 1) * row);
    run(model, grid, noise, |_, r| values.extend_from_slice(r))?;
    Ok(FieldSample {
        grid: *grid,
        d: model.d,
        preset: model.preset.name(),
        seed: noise.seed(),
        values,
    })
}

/// Solve the mild equation on `grid` driven by the counter-based noise of `seed`.
pub fn solve(model: &ModelSpec, grid: &SolverGrid, seed: u64) -> Result<FieldSample> {
    solve_with_noise(model, grid, &CounterNoise::new(grid, seed))
}

/// The additive (`σ ≡ Id`, `b ≡ 0`) field with each Fourier mode advanced by
/// its exact Ornstein–Uhlenbeck transition.
pub fn solve_additive_exact(alpha: Alpha, d: usize, grid: &SolverGrid, seed: u64) -> Result<FieldSample> {
    if alpha != grid.alpha {
        return Err(Error::domain(format!(
            "alpha {alpha} does not match grid alpha {}",
            grid.alpha
        )));
    }
    let model = ModelSpec::new(d, Preset::Additive).with_scheme(Scheme::ExactConvolution);
    solve(&model, grid, seed)
}

/// Per-node variance of the additive discrete scheme after `steps` steps
/// (identical at every node by translation invariance).
pub fn scheme_variance(grid: &SolverGrid, scheme: Scheme, steps: usize) -> f64 {
    let dt = grid.dt();
    let sum: f64 = grid
        .symbol()
        .iter()
        .map(|&s| {
            if s == 0.0 {
                return steps as f64 * dt;
            }
            let q = (-2.0 * dt * s).exp();
            // Σ_{m=0}^{steps-1} q^m
            let geo = -(-2.0 * dt * s * steps as f64).exp_m1() / -(-2.0 * dt * s).exp_m1();
            match scheme {
                Scheme::Walsh => dt * q * geo,
                Scheme::ExactConvolution => -(-2.0 * dt * s).exp_m1() / (2.0 * s) * geo,
            }
        })
        .sum();
    sum / (2.0 * grid.half_width)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(alpha: f64) -> SolverGrid {
        SolverGrid::new(Alpha::new(alpha).unwrap(), 1.0, 5.0, 32, 64).unwrap()
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let m = ModelSpec::new(2, Preset::DriftOnly { drift: 0.0 });
        let s = solve(&m, &grid(1.5), 1).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_drift_integrates_to_time() {
        for scheme in [Scheme::Walsh, Scheme::ExactConvolution] {
            let m = ModelSpec::new(1, Preset::DriftOnly { drift: 1.0 }).with_scheme(scheme);
            let g = grid(1.5);
            let s = solve(&m, &g, 1).unwrap();
            for k in 0..=g.nt {
                for j in 0..g.nx {
                    assert!((s.value(k, j, 0) - g.time(k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn initial_row_is_zero() {
        let m = ModelSpec::new(3, Preset::BoundedSmooth);
        let s = solve(&m, &grid(2.0), 9).unwrap();
        assert!(s.row(0).iter().all(|&v| v == 0.0));
        assert!(s.values.iter().all(|v| v.is_finite()));
        assert_eq!(s.values.len(), 33 * 64 * 3);
    }

    #[test]
    fn scheme_variance_limits() {
        // a single exact step of length T gives the torus variance of v(T)
        let g = SolverGrid::new(Alpha::new(2.0).unwrap(), 1.0, 10.0, 4, 4096).unwrap();
        let v4 = scheme_variance(&g, Scheme::ExactConvolution, 4);
        let g1 = SolverGrid { nt: 1, ..g };
        let v1 = scheme_variance(&g1, Scheme::ExactConvolution, 1);
        assert!((v4 - v1).abs() < 1e-12);
        let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((v4 - c).abs() < 2e-3, "{v4}");
    }

    #[test]
    fn alpha_mismatch_rejected() {
        let g = grid(2.0);
        assert!(solve_additive_exact(Alpha::new(1.5).unwrap(), 1, &g, 0).is_err());
    }
}
