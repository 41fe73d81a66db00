//! Probability that the field over one anisotropic cell meets a small ball.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, Alpha, ParabolicPoint};
use crate::potential::anisotropic_steps;
use crate::rng::{NormalStream, AUXILIARY_STREAM_BASE};
use crate::spde::{run, CounterNoise, ModelSpec, Preset, SolverGrid};
use crate::stats::{linear_fit, wilson_interval, Interval, Z_95};

/// How the field is sampled on the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SmallBallMethod {
    /// Additive field only: exact joint Gaussian law of the cell nodes.
    ExactGaussian {
        /// End time of the cell.
        horizon: f64,
    },
    /// Simulate on a grid that resolves every requested cell.
    Simulated { model: ModelSpec, grid: SolverGrid },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallBallSetup {
    pub alpha: Alpha,
    pub d: usize,
    pub z: Vec<f64>,
    pub levels: Vec<u32>,
    pub n_samples: usize,
    #[serde(default)]
    pub seed0: u64,
    /// Nodes per cell side for the exact method.
    #[serde(default = "default_nodes")]
    pub nodes_per_side: usize,
    /// Allowed shortfall of the fitted exponent below `d`.
    #[serde(default = "default_eta")]
    pub eta_report: f64,
    pub method: SmallBallMethod,
}

fn default_nodes() -> usize {
    3
}

fn default_eta() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallLevel {
    pub n: u32,
    pub radius: f64,
    pub hits: usize,
    pub samples: usize,
    pub frequency: f64,
    pub ci: Interval,
    /// Left out of the fit (no hits, or the ball swallows the whole range).
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallBallFit {
    pub levels: Vec<SmallBallLevel>,
    /// `-d log₂ p / dn`.
    pub exponent: f64,
    pub stderr: f64,
    pub eta_report: f64,
    /// `exponent ≥ d - eta_report`.
    pub passes: bool,
}

/// Frequencies above this count as "ball contains the whole range".
const SATURATED: f64 = 0.99;

/// Nodes `(t, x)` of the level-`n` cell `[T-τ, T] × [0, ξ]`, anchor first.
fn cell_nodes(alpha: Alpha, n: u32, horizon: f64, m: usize) -> Vec<ParabolicPoint> {
    let (tau, xi) = anisotropic_steps(alpha, n);
    let mut pts = vec![];
    for i in 0..m {
        for j in 0..m {
            let t = horizon - tau * i as f64 / (m - 1) as f64;
            let x = xi * j as f64 / (m - 1) as f64;
            pts.push(ParabolicPoint { t, x });
        }
    }
    pts
}

/// Lower-triangular factor of the law of `(u₀, u₁ - u₀, …)` at the nodes.
fn increment_factor(alpha: Alpha, pts: &[ParabolicPoint]) -> Result<DMatrix<f64>> {
    let m = pts.len();
    let inc = |a: ParabolicPoint, b: ParabolicPoint| -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let (late, early) = if a.t >= b.t { (a, b) } else { (b, a) };
        kernel::increment_variance_exact(alpha, late, early)
    };
    let c = kernel::squared_mass_constant(alpha)?;
    let th = alpha.time_exponent();
    let v0 = kernel::additive_variance(alpha, pts[0].t)?;
    let d0: Vec<f64> = pts.iter().map(|p| inc(pts[0], *p)).collect::<Result<_>>()?;
    let mut cov = DMatrix::<f64>::zeros(m, m);
    cov[(0, 0)] = v0;
    for i in 1..m {
        // V_i - V_0 without cancellation
        let dv = c * (pts[i].t.powf(th) - pts[0].t.powf(th));
        let x = 0.5 * (dv - d0[i]);
        cov[(0, i)] = x;
        cov[(i, 0)] = x;
        for j in i..m {
            let y = 0.5 * (d0[i] + d0[j] - inc(pts[i], pts[j])?);
            cov[(i, j)] = y;
            cov[(j, i)] = y;
        }
    }
    // factor the correlation matrix, then restore the scales
    let scale: Vec<f64> = (0..m).map(|i| cov[(i, i)].sqrt()).collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::domain("cell nodes must be distinct"));
    }
    let corr = DMatrix::from_fn(m, m, |i, j| cov[(i, j)] / (scale[i] * scale[j]));
    for jitter in [0.0, 1e-13, 1e-11, 1e-9] {
        let mut a = corr.clone();
        for i in 0..m {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            let l = ch.l();
            return Ok(DMatrix::from_fn(m, m, |i, j| l[(i, j)] * scale[i]));
        }
    }
    Err(Error::NonConvergence {
        method: "Cholesky",
        iterations: 4,
        gap: f64::NAN,
    })
}

fn exact_level(setup: &SmallBallSetup, horizon: f64, n: u32) -> Result<usize> {
    if setup.nodes_per_side < 2 {
        return Err(Error::domain("need at least 2 nodes per cell side"));
    }
    let pts = cell_nodes(setup.alpha, n, horizon, setup.nodes_per_side);
    let l = increment_factor(setup.alpha, &pts)?;
    let m = pts.len();
    let r2 = 0.25f64.powi(n as i32);
    let d = setup.d;
    let hits = (0..setup.n_samples as u64)
        .into_par_iter()
        .filter(|&i| {
            let mut dist2 = vec![0.0; m];
            for c in 0..d {
                let stream = AUXILIARY_STREAM_BASE + 64 * n as u64 + c as u64;
                let mut rng = NormalStream::new(setup.seed0 + i, stream);
                let g = DVector::from_fn(m, |_, _| rng.next_normal());
                let y = &l * g;
                for k in 0..m {
                    let u = if k == 0 { y[0] } else { y[0] + y[k] };
                    dist2[k] += (u - setup.z[c]).powi(2);
                }
            }
            dist2.iter().any(|v| *v <= r2)
        })
        .count();
    Ok(hits)
}

fn simulated_levels(setup: &SmallBallSetup, model: &ModelSpec, grid: &SolverGrid) -> Result<Vec<usize>> {
    if model.d != setup.d || grid.alpha != setup.alpha {
        return Err(Error::domain("model and grid must match the setup's α and d"));
    }
    let horizon = grid.horizon;
    let eps = 1e-9;
    // window of grid indices inside each level's cell
    let windows = setup
        .levels
        .iter()
        .map(|&n| {
            let (tau, xi) = anisotropic_steps(setup.alpha, n);
            if grid.dt() > tau * (1.0 + eps) || grid.dx() > xi * (1.0 + eps) {
                return Err(Error::domain(format!(
                    "grid (dt {}, dx {}) does not resolve the level-{n} cell ({tau}, {xi})",
                    grid.dt(),
                    grid.dx()
                )));
            }
            let ks: Vec<usize> = (0..=grid.nt)
                .filter(|&k| grid.time(k) >= horizon - tau * (1.0 + eps))
                .collect();
            let js: Vec<usize> = (0..grid.nx)
                .filter(|&j| {
                    let x = grid.position(j);
                    x >= -eps * xi && x <= xi * (1.0 + eps)
                })
                .collect();
            Ok((ks, js, 0.25f64.powi(n as i32)))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = setup.d;
    let per_seed = (0..setup.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut hit = vec![false; windows.len()];
            run(model, grid, &CounterNoise::new(grid, setup.seed0 + i), |k, row| {
                for (w, (ks, js, r2)) in windows.iter().enumerate() {
                    if hit[w] || ks.binary_search(&k).is_err() {
                        continue;
                    }
                    hit[w] = js.iter().any(|&j| {
                        let v: f64 = (0..d).map(|c| (row[j * d + c] - setup.z[c]).powi(2)).sum();
                        v <= *r2
                    });
                }
            })?;
            Ok(hit)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..windows.len())
        .map(|w| per_seed.iter().filter(|h| h[w]).count())
        .collect())
}

/// Hitting frequency of `B(z, 2^{-n})` from the level-`n` cell for each
/// level, and the fitted decay exponent of `p_n ≈ c 2^{-n·exponent}`.
pub fn small_ball_scaling(setup: &SmallBallSetup) -> Result<SmallBallFit> {
    if setup.d == 0 || setup.z.len() != setup.d {
        return Err(Error::domain("z must have d coordinates"));
    }
    if setup.levels.len() < 3 {
        return Err(Error::domain("the ladder needs at least 3 levels"));
    }
    if setup.levels.windows(2).any(|w| w[1] <= w[0]) || setup.levels[0] == 0 {
        return Err(Error::domain("levels must be positive and increasing"));
    }
    if setup.n_samples < 100 {
        return Err(Error::domain("small-ball frequencies need at least 100 samples"));
    }
    let hits: Vec<usize> = match &setup.method {
        SmallBallMethod::ExactGaussian { horizon } => {
            if !(*horizon > 0.0) {
                return Err(Error::domain("cell end time must be positive"));
            }
            for &n in &setup.levels {
                let (tau, _) = anisotropic_steps(setup.alpha, n);
                if tau >= *horizon {
                    return Err(Error::domain(format!("level-{n} cell does not fit before t = {horizon}")));
                }
            }
            setup
                .levels
                .iter()
                .map(|&n| exact_level(setup, *horizon, n))
                .collect::<Result<_>>()?
        }
        SmallBallMethod::Simulated { model, grid } => {
            if !matches!(model.preset, Preset::Additive | Preset::BoundedSmooth) {
                return Err(Error::domain("small-ball scaling needs the additive or bounded-smooth preset"));
            }
            simulated_levels(setup, model, grid)?
        }
    };
    let n = setup.n_samples;
    let levels: Vec<SmallBallLevel> = setup
        .levels
        .iter()
        .zip(&hits)
        .map(|(&lv, &h)| {
            let frequency = h as f64 / n as f64;
            SmallBallLevel {
                n: lv,
                radius: 0.5f64.powi(lv as i32),
                hits: h,
                samples: n,
                frequency,
                ci: wilson_interval(h, n, Z_95),
                excluded: h == 0 || frequency >= SATURATED,
            }
        })
        .collect();
    let used: Vec<&SmallBallLevel> = levels.iter().filter(|l| !l.excluded).collect();
    if used.len() < 2 {
        return Err(Error::domain(
            "fewer than two levels have usable frequencies; raise n_samples or change the ladder",
        ));
    }
    let x: Vec<f64> = used.iter().map(|l| l.n as f64).collect();
    let y: Vec<f64> = used.iter().map(|l| l.frequency.log2()).collect();
    let (_, slope, stderr, _) = linear_fit(&x, &y);
    let exponent = -slope;
    Ok(SmallBallFit {
        levels,
        exponent,
        stderr,
        eta_report: setup.eta_report,
        passes: exponent >= setup.d as f64 - setup.eta_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_covariance() {
        let alpha = Alpha::new(2.0).unwrap();
        let pts = cell_nodes(alpha, 2, 1.0, 2);
        let l = increment_factor(alpha, &pts).unwrap();
        let cov = &l * l.transpose();
        // Var(u₀) and E|u₁ - u₀|²
        assert!((cov[(0, 0)] / kernel::additive_variance(alpha, 1.0).unwrap() - 1.0).abs() < 1e-9);
        let d1 = kernel::increment_variance_exact(alpha, pts[0], pts[1]).unwrap();
        assert!((cov[(1, 1)] / d1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_short_ladders() {
        let s = SmallBallSetup {
            alpha: Alpha::new(2.0).unwrap(),
            d: 1,
            z: vec![0.0],
            levels: vec![3, 4],
            n_samples: 1000,
            seed0: 0,
            nodes_per_side: 3,
            eta_report: 0.2,
            method: SmallBallMethod::ExactGaussian { horizon: 1.0 },
        };
        assert!(small_ball_scaling(&s).is_err());
    }
}
