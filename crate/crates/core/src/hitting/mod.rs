//! Monte Carlo hitting probabilities and their comparison with the capacity
//! and Hausdorff bounds.

mod small_ball;

pub use small_ball::{small_ball_scaling, SmallBallFit, SmallBallLevel, SmallBallMethod, SmallBallSetup};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{
    capacity, dimension_thresholds, hausdorff_premeasure, CapacityOptions, CompactSetSpec, RieszOrder, Thresholds,
    Window,
};
use crate::spde::{run, CounterNoise, FieldSample, ModelSpec, SolverGrid};
use crate::stats::{wilson_interval, Interval, Z_95};

/// Which slice of the field is observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HittingMode {
    /// `u(I × J)`.
    SpaceTime,
    /// `u({t} × J)`.
    FixedTime { t: f64 },
    /// `u(I × {x})`.
    FixedSpace { x: f64 },
}

impl HittingMode {
    /// Order of capacity and Hausdorff measure that governs this mode.
    pub fn threshold(&self, th: &Thresholds) -> f64 {
        match self {
            HittingMode::SpaceTime => th.space_time,
            HittingMode::FixedTime { .. } => th.fixed_time,
            HittingMode::FixedSpace { .. } => th.fixed_space,
        }
    }
}

/// Grid nodes observed by an experiment: steps `ks` × nodes `js`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationWindow {
    pub steps: Vec<usize>,
    pub nodes: Vec<usize>,
}

/// Space margin required between `J` and the edge of the torus: the natural
/// length scale `T^{1/α}` of the kernel at the horizon.
pub fn kernel_tail_scale(grid: &SolverGrid) -> f64 {
    grid.horizon.powf(1.0 / grid.alpha.value())
}

impl ObservationWindow {
    pub fn new(grid: &SolverGrid, time: Window, space: Window, mode: HittingMode) -> Result<Self> {
        if !(time.lo > 0.0) || time.hi > grid.horizon * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "time window [{}, {}] must lie in (0, T] with T = {}",
                time.lo, time.hi, grid.horizon
            )));
        }
        let margin = kernel_tail_scale(grid);
        if space.lo < -grid.half_width + margin || space.hi > grid.half_width - margin {
            return Err(Error::domain(format!(
                "space window [{}, {}] must keep a margin {margin:.3} from the torus edge ±{}",
                space.lo, space.hi, grid.half_width
            )));
        }
        let eps_t = 1e-9 * grid.dt();
        let eps_x = 1e-9 * grid.dx();
        let steps_in = |w: Window| -> Vec<usize> {
            (1..=grid.nt)
                .filter(|&k| grid.time(k) >= w.lo - eps_t && grid.time(k) <= w.hi + eps_t)
                .collect()
        };
        let nodes_in = |w: Window| -> Vec<usize> {
            (0..grid.nx)
                .filter(|&j| grid.position(j) >= w.lo - eps_x && grid.position(j) <= w.hi + eps_x)
                .collect()
        };
        let (steps, nodes) = match mode {
            HittingMode::SpaceTime => (steps_in(time), nodes_in(space)),
            HittingMode::FixedTime { t } => {
                if !time.contains(t) {
                    return Err(Error::domain(format!("fixed time {t} is outside I")));
                }
                let k = grid
                    .step_index(t)
                    .filter(|&k| (grid.time(k) - t).abs() <= eps_t)
                    .ok_or_else(|| Error::domain(format!("time {t} is not on the grid")))?;
                (vec![k], nodes_in(space))
            }
            HittingMode::FixedSpace { x } => {
                if !space.contains(x) {
                    return Err(Error::domain(format!("fixed position {x} is outside J")));
                }
                let j = grid
                    .node_index(x)
                    .filter(|&j| (grid.position(j) - x).abs() <= eps_x)
                    .ok_or_else(|| Error::domain(format!("position {x} is not on the grid")))?;
                (steps_in(time), vec![j])
            }
        };
        if steps.is_empty() || nodes.is_empty() {
            return Err(Error::domain("the window contains no grid node; refine the grid"));
        }
        Ok(ObservationWindow { steps, nodes })
    }

    fn contains_step(&self, k: usize) -> bool {
        self.steps.binary_search(&k).is_ok()
    }
}

fn row_min_distance(row: &[f64], d: usize, nodes: &[usize], target: &CompactSetSpec) -> f64 {
    nodes
        .iter()
        .map(|&j| target.distance(&row[j * d..(j + 1) * d]))
        .fold(f64::INFINITY, f64::min)
}

/// Smallest distance from `u` to the target over the window nodes.
pub fn window_distance(sample: &FieldSample, window: &ObservationWindow, target: &CompactSetSpec) -> f64 {
    window
        .steps
        .iter()
        .map(|&k| row_min_distance(sample.row(k), sample.d, &window.nodes, target))
        .fold(f64::INFINITY, f64::min)
}

/// True iff some window node has `dist(u(t,x), A) ≤ δ`.
pub fn hit_test(
    sample: &FieldSample,
    time: Window,
    space: Window,
    mode: HittingMode,
    target: &CompactSetSpec,
    dilation: f64,
) -> Result<bool> {
    if target.dimension != sample.d {
        return Err(Error::domain("target dimension differs from the field dimension"));
    }
    if !(dilation >= 0.0) {
        return Err(Error::domain("dilation must be non-negative"));
    }
    let w = ObservationWindow::new(&sample.grid, time, space, mode)?;
    Ok(window_distance(sample, &w, target) <= dilation)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HittingExperiment {
    pub model: ModelSpec,
    pub grid: SolverGrid,
    pub time: Window,
    pub space: Window,
    pub mode: HittingMode,
    pub target: CompactSetSpec,
    /// Hit tolerance; defaults to the empirical Hölder modulus of one cell.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<f64>,
    pub n_samples: usize,
    #[serde(default)]
    pub seed0: u64,
    /// Mesh for the target's capacity; default a sixteenth of its smallest side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_mesh: Option<f64>,
    /// Scale for the Hausdorff covering; default a quarter of the smallest side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hausdorff_eps: Option<f64>,
}

/// Hits at an alternative dilation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sensitivity {
    pub dilation: f64,
    pub hits: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HittingResult {
    pub estimate: f64,
    pub wilson_ci: Interval,
    pub n: usize,
    pub hit_count: usize,
    pub dilation: f64,
    /// Hit counts at `δ/2` and `2δ`.
    pub half_dilation: Sensitivity,
    pub double_dilation: Sensitivity,
    pub thresholds: Thresholds,
    /// Order used for the bounds in this mode.
    pub threshold: f64,
    pub capacity_value: f64,
    pub hausdorff_value: f64,
    /// Per-trajectory minimum distance to the target, in seed order.
    #[serde(skip)]
    pub distances: Vec<f64>,
}

/// Natural length of the target for default meshes.
fn target_scale(target: &CompactSetSpec) -> f64 {
    let sides = target
        .boxes
        .iter()
        .flat_map(|b| b.lo.iter().zip(&b.hi).map(|(l, h)| h - l))
        .chain(target.mesh.filter(|_| !target.points.is_empty()))
        .filter(|s| *s > 0.0)
        .fold(f64::INFINITY, f64::min);
    if sides.is_finite() {
        sides
    } else {
        0.1
    }
}

/// RMS one-cell increments of the first few trajectories scaled by the
/// parabolic metric, times the metric diameter of a grid cell.
pub fn default_dilation(model: &ModelSpec, grid: &SolverGrid, window: &ObservationWindow, seed0: u64) -> Result<f64> {
    let pilot: Vec<u64> = (seed0..seed0 + 16).collect();
    let d = model.d;
    let a = grid.alpha.value();
    let ht = grid.dt().powf((a - 1.0) / (2.0 * a));
    let hx = grid.dx().powf((a - 1.0) / 2.0);
    let sums = pilot
        .par_iter()
        .map(|&seed| {
            let (mut st, mut nt, mut sx, mut nx) = (0.0, 0usize, 0.0, 0usize);
            let mut prev: Option<Vec<f64>> = None;
            run(model, grid, &CounterNoise::new(grid, seed), |k, row| {
                if window.contains_step(k) {
                    for &j in &window.nodes {
                        let jn = (j + 1) % grid.nx;
                        for c in 0..d {
                            sx += (row[jn * d + c] - row[j * d + c]).powi(2);
                        }
                        nx += 1;
                        if let Some(p) = &prev {
                            for c in 0..d {
                                st += (row[j * d + c] - p[j * d + c]).powi(2);
                            }
                            nt += 1;
                        }
                    }
                }
                prev = Some(row.to_vec());
            })?;
            Ok((st, nt, sx, nx))
        })
        .collect::<Result<Vec<_>>>()?;
    let (st, nt, sx, nx) = sums
        .iter()
        .fold((0.0, 0, 0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
    let ct = if nt > 0 { (st / nt as f64).sqrt() / ht } else { 0.0 };
    let cx = if nx > 0 { (sx / nx as f64).sqrt() / hx } else { 0.0 };
    Ok(ct.max(cx) * (ht + hx))
}

impl HittingExperiment {
    pub fn validate(&self) -> Result<ObservationWindow> {
        self.grid.validate()?;
        self.model.coefficients()?;
        self.target.validate()?;
        if self.target.dimension != self.model.d {
            return Err(Error::domain(format!(
                "target lives in R^{} but the field in R^{}",
                self.target.dimension, self.model.d
            )));
        }
        if self.n_samples < 100 {
            return Err(Error::domain(format!(
                "hitting experiments need at least 100 samples, got {}",
                self.n_samples
            )));
        }
        if let Some(dl) = self.dilation {
            if !(dl >= 0.0) {
                return Err(Error::domain("dilation must be non-negative"));
            }
        }
        ObservationWindow::new(&self.grid, self.time, self.space, self.mode)
    }
}

/// Run the experiment: trajectories with seeds `seed0..seed0+n`, Wilson 95%
/// interval, and the target's capacity and Hausdorff pre-measure at the
/// mode's threshold. A failing trajectory aborts with the counts of the
/// trajectories before it.
pub fn hitting_probability_mc(exp: &HittingExperiment) -> Result<HittingResult> {
    let window = exp.validate()?;
    let dilation = match exp.dilation {
        Some(d) => d,
        None => default_dilation(&exp.model, &exp.grid, &window, exp.seed0)?,
    };
    let seeds: Vec<u64> = (0..exp.n_samples as u64).map(|i| exp.seed0 + i).collect();
    let d = exp.model.d;
    let outcomes: Vec<Result<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut best = f64::INFINITY;
            run(&exp.model, &exp.grid, &CounterNoise::new(&exp.grid, seed), |k, row| {
                if window.contains_step(k) {
                    best = best.min(row_min_distance(row, d, &window.nodes, &exp.target));
                }
            })
            .map_err(|e| Error::Trajectory {
                seed,
                source: Box::new(e),
            })?;
            Ok(best)
        })
        .collect();
    let mut distances = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(v) => distances.push(v),
            Err(e) => {
                let hits = distances.iter().filter(|v| **v <= dilation).count();
                return Err(Error::Partial {
                    completed: distances.len(),
                    hits,
                    source: Box::new(e),
                });
            }
        }
    }
    let n = distances.len();
    let count = |delta: f64| distances.iter().filter(|v| **v <= delta).count();
    let hit_count = count(dilation);
    let sens = |delta: f64| {
        let hits = count(delta);
        Sensitivity {
            dilation: delta,
            hits,
            estimate: hits as f64 / n as f64,
        }
    };
    let thresholds = dimension_thresholds(exp.grid.alpha, d)?;
    let threshold = exp.mode.threshold(&thresholds);
    let scale = target_scale(&exp.target);
    let cap = capacity(
        &exp.target,
        RieszOrder(threshold),
        exp.capacity_mesh.unwrap_or(scale / 16.0),
        CapacityOptions::default(),
    )?;
    let haus = hausdorff_premeasure(&exp.target, RieszOrder(threshold), exp.hausdorff_eps.unwrap_or(scale / 4.0))?;
    Ok(HittingResult {
        estimate: hit_count as f64 / n as f64,
        wilson_ci: wilson_interval(hit_count, n, Z_95),
        n,
        hit_count,
        dilation,
        half_dilation: sens(dilation / 2.0),
        double_dilation: sens(dilation * 2.0),
        thresholds,
        threshold,
        capacity_value: cap.capacity,
        hausdorff_value: haus.value,
        distances,
    })
}

/// Implied constants of the two-sided hitting bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// `p̂ / Cap`, when the capacity is positive.
    pub lower_constant: Option<f64>,
    /// `p̂ / ℋ`, when the pre-measure is positive and finite.
    pub upper_constant: Option<f64>,
    /// The lower bound cannot be violated: with `Cap = 1` it reads `ĉ₁ ≤ 1`.
    pub ordering_ok: bool,
    /// `ℋ = +∞`: the upper bound says nothing.
    pub upper_vacuous: bool,
}

pub fn bound_comparison(result: &HittingResult) -> BoundReport {
    let p = result.estimate;
    let lower_constant = (result.capacity_value > 0.0).then(|| p / result.capacity_value);
    let upper_vacuous = result.hausdorff_value.is_infinite();
    let upper_constant = (result.hausdorff_value > 0.0 && !upper_vacuous).then(|| p / result.hausdorff_value);
    let ordering_ok = if result.capacity_value == 1.0 {
        lower_constant.is_some_and(|c| c <= 1.0)
    } else {
        true
    };
    BoundReport {
        lower_constant,
        upper_constant,
        ordering_ok,
        upper_vacuous,
    }
}

/// `max/min` of the implied lower constants across a family of targets;
/// `None` when some member has no constant or a zero one.
pub fn constant_spread(reports: &[BoundReport]) -> Option<f64> {
    let cs: Option<Vec<f64>> = reports.iter().map(|r| r.lower_constant.filter(|c| *c > 0.0)).collect();
    let cs = cs?;
    let hi = cs.iter().cloned().fold(0.0, f64::max);
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    (!cs.is_empty()).then(|| hi / lo)
}
