use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::ParabolicPoint;
use crate::spde::{FieldSample, SolverGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Time,
    Space,
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn mean_and_stderr(xs: &[f64]) -> MomentEstimate {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    MomentEstimate {
        mean,
        stderr: (var / nf).sqrt(),
        n,
    }
}

fn node(grid: &SolverGrid, p: ParabolicPoint) -> Result<(usize, usize)> {
    let k = grid
        .step_index(p.t)
        .ok_or_else(|| Error::domain(format!("time {} outside the grid", p.t)))?;
    let j = grid
        .node_index(p.x)
        .ok_or_else(|| Error::domain(format!("position {} outside the torus", p.x)))?;
    Ok((k, j))
}

/// `E‖u(t,x) - u(s,y)‖^p` for each pair, points snapped to the nearest node.
pub fn increment_moments(
    samples: &[FieldSample],
    pairs: &[(ParabolicPoint, ParabolicPoint)],
    p: f64,
) -> Result<Vec<MomentEstimate>> {
    if pairs.is_empty() {
        return Err(Error::domain("no point pairs given"));
    }
    if samples.len() < 100 {
        return Err(Error::domain(format!(
            "increment moments need at least 100 samples, got {}",
            samples.len()
        )));
    }
    let grid = samples[0].grid;
    let idx = pairs
        .iter()
        .map(|&(a, b)| Ok((node(&grid, a)?, node(&grid, b)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(idx
        .iter()
        .map(|&((k1, j1), (k2, j2))| {
            let xs: Vec<f64> = samples
                .iter()
                .map(|s| {
                    let a = s.point(k1, j1);
                    let b = s.point(k2, j2);
                    let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                    r2.powf(p / 2.0)
                })
                .collect();
            mean_and_stderr(&xs)
        })
        .collect())
}

/// Lags (in grid cells or steps) at which increments are averaged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagPlan {
    pub direction: Direction,
    pub lags: Vec<usize>,
    /// First time step used as a base point in the time direction, and the
    /// time step whose row is used in the space direction.
    pub anchor_step: usize,
    /// Spacing between base points.
    pub stride: usize,
}

/// Smallest lag admitted by the regression, in cells.
pub const MIN_LAG_CELLS: usize = 4;

impl LagPlan {
    /// `count` roughly geometric lags from `min_lag` to `max_lag` cells.
    ///
    /// In the time direction base points run from `nt/2` so that the process
    /// has settled away from the zero initial condition; in space the final
    /// time row is used with periodic wrap-around.
    pub fn geometric(
        direction: Direction,
        grid: &SolverGrid,
        min_lag: usize,
        max_lag: usize,
        count: usize,
    ) -> Result<Self> {
        if min_lag < MIN_LAG_CELLS {
            return Err(Error::domain(format!(
                "lags below {MIN_LAG_CELLS} cells are not resolved"
            )));
        }
        if count < 5 || (max_lag as f64) < 100.0 * min_lag as f64 * (1.0 - 1e-12) {
            return Err(Error::domain(
                "need at least 5 lags spanning two decades",
            ));
        }
        let ratio = (max_lag as f64 / min_lag as f64).powf(1.0 / (count - 1) as f64);
        let mut lags: Vec<usize> = (0..count)
            .map(|i| (min_lag as f64 * ratio.powi(i as i32)).round() as usize)
            .collect();
        lags.dedup();
        if lags.len() < 5 {
            return Err(Error::domain("lag ladder collapsed to fewer than 5 distinct lags"));
        }
        let (anchor_step, stride) = match direction {
            Direction::Time => {
                let anchor = grid.nt / 2;
                if anchor + max_lag > grid.nt {
                    return Err(Error::domain(format!(
                        "time lag {max_lag} does not fit after step {anchor} (nt = {})",
                        grid.nt
                    )));
                }
                (anchor, 8.max(max_lag / 50))
            }
            Direction::Space => {
                if max_lag > grid.nx / 2 {
                    return Err(Error::domain(format!(
                        "space lag {max_lag} exceeds half the torus ({} nodes)",
                        grid.nx / 2
                    )));
                }
                (grid.nt, 1)
            }
        };
        Ok(LagPlan {
            direction,
            lags,
            anchor_step,
            stride,
        })
    }

    pub fn physical_lags(&self, grid: &SolverGrid) -> Vec<f64> {
        let h = match self.direction {
            Direction::Time => grid.dt(),
            Direction::Space => grid.dx(),
        };
        self.lags.iter().map(|&l| l as f64 * h).collect()
    }
}

/// Per-lag average of `‖Δu‖^p` over all base points of one sample.
pub fn lag_moments(sample: &FieldSample, plan: &LagPlan, p: f64) -> Vec<f64> {
    let g = &sample.grid;
    let d = sample.d;
    let norm_p = |a: &[f64], b: &[f64]| -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        if p == 2.0 {
            r2
        } else {
            r2.powf(p / 2.0)
        }
    };
    plan.lags
        .iter()
        .map(|&lag| match plan.direction {
            Direction::Time => {
                let max_lag = *plan.lags.last().expect("non-empty ladder");
                let last_base = g.nt - max_lag;
                let mut acc = 0.0;
                let mut count = 0usize;
                let mut k = plan.anchor_step;
                while k <= last_base {
                    let r0 = sample.row(k);
                    let r1 = sample.row(k + lag);
                    for j in 0..g.nx {
                        acc += norm_p(&r0[j * d..(j + 1) * d], &r1[j * d..(j + 1) * d]);
                    }
                    count += g.nx;
                    k += plan.stride;
                }
                acc / count as f64
            }
            Direction::Space => {
                let row = sample.row(plan.anchor_step);
                let mut acc = 0.0;
                for j in 0..g.nx {
                    let jj = (j + lag) % g.nx;
                    acc += norm_p(&row[j * d..(j + 1) * d], &row[jj * d..(jj + 1) * d]);
                }
                acc / g.nx as f64
            }
        })
        .collect()
}

/// Least-squares fit of `log moment` against `log lag`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    pub direction: Direction,
    pub p: f64,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub intercept: f64,
    pub lags: Vec<f64>,
    pub moments: Vec<f64>,
    pub moment_stderr: Vec<f64>,
    pub samples: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, stderr(b), r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
    let se = if x.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    (a, b, se, r2)
}

/// Fit from per-sample lag moments (one row per sample, as returned by
/// [`lag_moments`]).
pub fn holder_fit(per_sample: &[Vec<f64>], plan: &LagPlan, grid: &SolverGrid, p: f64) -> Result<HolderFit> {
    if per_sample.is_empty() {
        return Err(Error::domain("no samples"));
    }
    let lags = plan.physical_lags(grid);
    let est: Vec<MomentEstimate> = (0..lags.len())
        .map(|i| mean_and_stderr(&per_sample.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect();
    if est.iter().any(|e| !(e.mean > 0.0)) {
        return Err(Error::domain("non-positive increment moment; cannot take logarithms"));
    }
    let lx: Vec<f64> = lags.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = est.iter().map(|e| e.mean.ln()).collect();
    let (a, b, se, r2) = linear_fit(&lx, &ly);
    Ok(HolderFit {
        direction: plan.direction,
        p,
        slope: b,
        stderr: se,
        r2,
        intercept: a,
        lags,
        moments: est.iter().map(|e| e.mean).collect(),
        moment_stderr: est.iter().map(|e| e.stderr).collect(),
        samples: per_sample.len(),
    })
}

/// Convenience wrapper over stored trajectories.
pub fn holder_fit_samples(samples: &[FieldSample], plan: &LagPlan, p: f64) -> Result<HolderFit> {
    if samples.is_empty() {
        return Err(Error::domain("no samples"));
    }
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| lag_moments(s, plan, p)).collect();
    holder_fit(&rows, plan, &samples[0].grid, p)
}

/// The slope predicted for `p`-th moments by the parabolic metric.
pub fn expected_slope(alpha: crate::kernel::Alpha, direction: Direction, p: f64) -> f64 {
    let a = alpha.value();
    match direction {
        Direction::Time => p * (a - 1.0) / (2.0 * a),
        Direction::Space => p * (a - 1.0) / 2.0,
    }
}
