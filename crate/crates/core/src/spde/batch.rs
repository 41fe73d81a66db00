use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::SolverGrid;
use super::noise::{generate_noise, CounterNoise, NoiseRealization};
use super::solver::{run, solve, solve_with_noise, scheme_variance, FieldSample, ModelSpec, Scheme};
use super::coefficients::Preset;
use crate::error::{Error, Result};

/// What a batch keeps of each trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub seed: u64,
    /// `u(T, 0)` per component.
    pub probe: Vec<f64>,
    /// Spatial mean of `u(T, ·)²` per component.
    pub final_mean_square: Vec<f64>,
    /// `max |u_c(t, x)|` over the whole trajectory.
    pub sup_abs: f64,
}

fn tag(seed: u64, e: Error) -> Error {
    Error::Trajectory {
        seed,
        source: Box::new(e),
    }
}

/// Summaries of independent trajectories, in seed order. Each trajectory is
/// streamed through its summary and never stored, and the output does not
/// depend on how rayon schedules the seeds.
pub fn batch_solve(model: &ModelSpec, grid: &SolverGrid, seeds: &[u64]) -> Result<Vec<FieldSummary>> {
    if seeds.is_empty() {
        return Err(Error::domain("batch needs at least one seed"));
    }
    let d = model.d;
    let j0 = grid.origin_index();
    let nt = grid.nt;
    seeds
        .par_iter()
        .map(|&seed| {
            let mut summary = FieldSummary {
                seed,
                probe: vec![0.0; d],
                final_mean_square: vec![0.0; d],
                sup_abs: 0.0,
            };
            run(model, grid, &CounterNoise::new(grid, seed), |k, row| {
                for v in row {
                    summary.sup_abs = summary.sup_abs.max(v.abs());
                }
                if k == nt {
                    summary.probe.copy_from_slice(&row[j0 * d..(j0 + 1) * d]);
                    for c in 0..d {
                        let s: f64 = row.iter().skip(c).step_by(d).map(|v| v * v).sum();
                        summary.final_mean_square[c] = s / grid.nx as f64;
                    }
                }
            })
            .map_err(|e| tag(seed, e))?;
            Ok(summary)
        })
        .collect()
}

/// Apply `f` to each full trajectory, in seed order.
pub fn batch_map<S, F>(model: &ModelSpec, grid: &SolverGrid, seeds: &[u64], f: F) -> Result<Vec<S>>
where
    S: Send,
    F: Fn(&FieldSample) -> S + Sync,
{
    if seeds.is_empty() {
        return Err(Error::domain("batch needs at least one seed"));
    }
    seeds
        .par_iter()
        .map(|&seed| {
            let s = solve(model, grid, seed).map_err(|e| tag(seed, e))?;
            Ok(f(&s))
        })
        .collect()
}

/// One rung of the mean-square refinement ladder.
#[derive(Debug, Clone, Serialize)]
pub struct LadderLevel {
    pub nt: usize,
    pub nx: usize,
    pub mean_square_error: f64,
    pub standard_error: f64,
}

/// `E|u_level(T, 0) - u_ref(T, 0)|²` for the additive model, where every
/// level is driven by the same Brownian sheet: the reference is the
/// exact-convolution solution on a grid one refinement finer than the
/// finest level, and coarser levels see its noise aggregated into their cells.
pub fn refinement_ladder(
    scheme: Scheme,
    base: &SolverGrid,
    levels: usize,
    seeds: &[u64],
) -> Result<Vec<LadderLevel>> {
    if levels < 2 || seeds.is_empty() {
        return Err(Error::domain("ladder needs at least two levels and one seed"));
    }
    let mut fine = *base;
    for _ in 0..levels {
        fine = fine.refined();
    }
    let per_seed: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<f64>> {
            let mut noise: NoiseRealization = generate_noise(&fine, 1, seed)?;
            let reference_model = ModelSpec::new(1, Preset::Additive).with_scheme(Scheme::ExactConvolution);
            let r = probe(&solve_with_noise(&reference_model, &fine, &noise)?);
            let mut grid = fine;
            let mut errs = vec![0.0; levels];
            let model = ModelSpec::new(1, Preset::Additive).with_scheme(scheme);
            for lvl in (0..levels).rev() {
                noise = noise.coarsen()?;
                grid = SolverGrid {
                    nt: grid.nt / 2,
                    nx: grid.nx / 2,
                    ..grid
                };
                let u = probe(&solve_with_noise(&model, &grid, &noise)?);
                errs[lvl] = (u - r) * (u - r);
            }
            Ok(errs)
        })
        .collect::<Result<_>>()?;
    let n = seeds.len() as f64;
    let mut grid = *base;
    let mut out = Vec::with_capacity(levels);
    for lvl in 0..levels {
        let mean = per_seed.iter().map(|e| e[lvl]).sum::<f64>() / n;
        let var = per_seed.iter().map(|e| (e[lvl] - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        out.push(LadderLevel {
            nt: grid.nt,
            nx: grid.nx,
            mean_square_error: mean,
            standard_error: (var / n).sqrt(),
        });
        grid = grid.refined();
    }
    Ok(out)
}

fn probe(s: &FieldSample) -> f64 {
    s.value(s.grid.nt, s.grid.origin_index(), 0)
}

/// Effect of doubling the torus width on the additive one-point variance.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationReport {
    pub variance: f64,
    pub variance_widened: f64,
    pub relative_change: f64,
    pub tail_deficit: f64,
}

pub fn truncation_sensitivity(grid: &SolverGrid, scheme: Scheme) -> Result<TruncationReport> {
    let v = scheme_variance(grid, scheme, grid.nt);
    let wide = grid.widened();
    let w = scheme_variance(&wide, scheme, wide.nt);
    Ok(TruncationReport {
        variance: v,
        variance_widened: w,
        relative_change: (w - v).abs() / w,
        tail_deficit: grid.tail_deficit()?,
    })
}
