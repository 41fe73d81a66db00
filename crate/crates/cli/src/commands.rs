//! One runner per subcommand. Each validates its config before touching the
//! output directory, writes its tables, and reports whether its checks held.

use std::path::Path;

use anyhow::Result;
use fracheat::checks::{kernel_identity_suite, DEFAULT_RELATIVE_TOLERANCE};
use fracheat::hitting::{bound_comparison, hitting_probability_mc, small_ball_scaling};
use fracheat::kernel;
use fracheat::potential::{capacity, hausdorff_premeasure, CapacityOptions, RieszOrder};
use fracheat::spde::{batch_map, batch_solve, io, solve};
use fracheat::stats::{
    dominating_polynomial_constant, expected_slope, gaussian_bound_check, gaussian_envelope, holder_fit, kde_density,
    lag_moments, linspace, polynomial_bound_check, polynomial_envelope, sup_bound, GaussianPair, LagPlan,
    MIN_KDE_SAMPLES,
};
use fracheat::{Error, ParabolicPoint, Preset};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::config::*;
use crate::output::{num, sha256_hex, Manifest, Output, SeedRange};
use crate::svg::{Plot, Series};
use crate::UsageError;

/// Run-wide settings that are not part of an experiment config.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub tolerance: Option<f64>,
    pub plots: bool,
}

pub trait Experiment: Serialize + DeserializeOwned + Default {
    const NAME: &'static str;
    fn set_seed(&mut self, _seed: u64) {}
    fn seeds(&self) -> Vec<SeedRange> {
        vec![]
    }
    fn validate(&self) -> Result<()>;
    /// Returns whether the run's checks passed.
    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool>;
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn range(label: &str, first: u64, count: usize) -> SeedRange {
    SeedRange {
        label: label.into(),
        first,
        count: count as u64,
    }
}

fn seed_list(first: u64, count: usize) -> Vec<u64> {
    (first..first + count as u64).collect()
}

/// Validate, run, and write the manifest (plus the failure marker when the
/// run aborts, keeping whatever files were already written).
pub fn execute<E: Experiment>(cfg: &E, ctx: &Ctx, dir: &Path) -> Result<bool> {
    cfg.validate()?;
    let config = serde_json::to_value(cfg)?;
    let mut out = Output::create(dir)?;
    let mut manifest = Manifest {
        command: E::NAME.into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: sha256_hex(&serde_json::to_vec(&config)?),
        config,
        seeds: cfg.seeds(),
        tolerance: ctx.tolerance,
        plots: ctx.plots,
        status: String::new(),
        outputs: vec![],
    };
    match cfg.run(ctx, &mut out) {
        Ok(pass) => {
            manifest.status = if pass { "ok" } else { "check-failed" }.into();
            out.finish(manifest, None)?;
            Ok(pass)
        }
        Err(e) => {
            manifest.status = "failed".into();
            out.finish(manifest, Some(&format!("{e:#}")))?;
            Err(e)
        }
    }
}

/// Rerun a manifest's command with its recorded config.
pub fn execute_named(name: &str, config: serde_json::Value, ctx: &Ctx, dir: &Path) -> Result<bool> {
    fn go<E: Experiment>(config: serde_json::Value, ctx: &Ctx, dir: &Path) -> Result<bool> {
        let cfg: E = serde_json::from_value(config).map_err(|e| usage(format!("manifest config: {e}")))?;
        execute(&cfg, ctx, dir)
    }
    match name {
        KernelCheckConfig::NAME => go::<KernelCheckConfig>(config, ctx, dir),
        SimulateConfig::NAME => go::<SimulateConfig>(config, ctx, dir),
        HolderConfig::NAME => go::<HolderConfig>(config, ctx, dir),
        DensityConfig::NAME => go::<DensityConfig>(config, ctx, dir),
        CapacityConfig::NAME => go::<CapacityConfig>(config, ctx, dir),
        HausdorffConfig::NAME => go::<HausdorffConfig>(config, ctx, dir),
        HittingConfig::NAME => go::<HittingConfig>(config, ctx, dir),
        other => Err(usage(format!("manifest names unknown command {other:?}"))),
    }
}

fn plot(out: &mut Output, ctx: &Ctx, name: &str, p: Plot) -> Result<()> {
    if ctx.plots {
        out.write(name, p.render().as_bytes())?;
    }
    Ok(())
}

impl Experiment for KernelCheckConfig {
    const NAME: &'static str = "kernel-check";

    fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(usage("kernel-check needs at least one alpha"));
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let tol = ctx.tolerance.unwrap_or(DEFAULT_RELATIVE_TOLERANCE);
        let (mut rows, mut constants) = (vec![], vec![]);
        let mut pass = true;
        for &a in &self.alphas {
            for c in kernel_identity_suite(a, tol)? {
                println!(
                    "alpha {:<4} {:<22} error {:>10.3e}  tol {:.0e}  {}",
                    a,
                    c.name,
                    c.error,
                    c.tolerance,
                    if c.passed { "PASS" } else { "FAIL" }
                );
                pass &= c.passed;
                rows.push(vec![num(c.alpha), c.name.into(), num(c.error), num(c.tolerance), c.passed.to_string()]);
            }
            let z = kernel::zeta_min(a)?;
            constants.push(vec![
                num(a.value()),
                num(kernel::squared_mass_constant(a)?),
                num(kernel::kernel_at_origin(a)?),
                num(kernel::tail_constant(a)?),
                num(z.value),
                num(z.argmin),
            ]);
        }
        out.write_csv("kernel_checks.csv", &["alpha", "check", "error", "tolerance", "passed"], &rows)?;
        out.write_csv(
            "kernel_constants.csv",
            &["alpha", "c_alpha", "g_origin", "tail_constant", "zeta_min", "zeta_argmin"],
            &constants,
        )?;
        Ok(pass)
    }
}

impl Experiment for SimulateConfig {
    const NAME: &'static str = "simulate";

    fn set_seed(&mut self, seed: u64) {
        self.seed0 = seed;
    }

    fn seeds(&self) -> Vec<SeedRange> {
        vec![range("trajectories", self.seed0, self.samples)]
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.model.coefficients()?;
        if self.samples == 0 || self.export > self.samples {
            return Err(usage("need samples >= 1 and export <= samples"));
        }
        if self.t_stride == 0 || self.x_stride == 0 {
            return Err(usage("csv strides must be positive"));
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let seeds = seed_list(self.seed0, self.samples);
        let summaries = batch_solve(&self.model, &self.grid, &seeds)?;
        let mut rows = vec![];
        for s in &summaries {
            for c in 0..self.model.d {
                rows.push(vec![
                    s.seed.to_string(),
                    c.to_string(),
                    num(s.probe[c]),
                    num(s.final_mean_square[c]),
                    num(s.sup_abs),
                ]);
            }
        }
        out.write_csv(
            "summary.csv",
            &["seed", "component", "probe", "final_mean_square", "sup_abs"],
            &rows,
        )?;
        for &seed in &seeds[..self.export] {
            let s = solve(&self.model, &self.grid, seed)?;
            let mut csv = vec![];
            io::write_csv(&s, &mut csv, self.t_stride, self.x_stride)?;
            out.write(&format!("trajectory_{seed}.csv"), &csv)?;
            let mut bin = vec![];
            io::write_snapshot(&s, &mut bin)?;
            out.write(&format!("trajectory_{seed}.bin"), &bin)?;
            if seed == self.seed0 {
                let g = &self.grid;
                let series = (0..self.model.d)
                    .map(|c| Series {
                        name: format!("u_{c}(T, x)"),
                        points: (0..g.nx).map(|j| (g.position(j), s.value(g.nt, j, c))).collect(),
                        line: true,
                    })
                    .collect();
                plot(
                    out,
                    ctx,
                    "profile.svg",
                    Plot {
                        title: format!("final profile, seed {seed}"),
                        x_label: "x".into(),
                        y_label: "u".into(),
                        series,
                        ..Default::default()
                    },
                )?;
            }
        }
        let ms: f64 = summaries.iter().map(|s| s.final_mean_square[0]).sum::<f64>() / summaries.len() as f64;
        println!("{} trajectories; mean of spatial E u_0(T)^2 = {ms:.6}", summaries.len());
        Ok(true)
    }
}

impl HolderConfig {
    fn plans(&self) -> Result<Vec<LagPlan>> {
        self.directions
            .iter()
            .map(|&d| Ok(LagPlan::geometric(d, &self.grid, self.min_lag, self.max_lag, self.lag_count)?))
            .collect()
    }
}

impl Experiment for HolderConfig {
    const NAME: &'static str = "holder";

    fn set_seed(&mut self, seed: u64) {
        self.seed0 = seed;
    }

    fn seeds(&self) -> Vec<SeedRange> {
        vec![range("trajectories", self.seed0, self.samples)]
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.model.coefficients()?;
        if self.samples < 2 || !(self.p > 0.0) || self.directions.is_empty() {
            return Err(usage("holder needs samples >= 2, p > 0 and at least one direction"));
        }
        self.plans()?;
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let tol = ctx.tolerance.unwrap_or(0.05);
        let plans = self.plans()?;
        let p = self.p;
        let per_sample: Vec<Vec<Vec<f64>>> = batch_map(&self.model, &self.grid, &seed_list(self.seed0, self.samples), |s| {
            plans.iter().map(|pl| lag_moments(s, pl, p)).collect()
        })?;
        // the predicted slopes describe the noise-driven presets only
        let checked = matches!(self.model.preset, Preset::Additive | Preset::BoundedSmooth);
        let (mut slopes, mut moments, mut series) = (vec![], vec![], vec![]);
        let mut pass = true;
        for (i, plan) in plans.iter().enumerate() {
            let rows: Vec<Vec<f64>> = per_sample.iter().map(|r| r[i].clone()).collect();
            let fit = holder_fit(&rows, plan, &self.grid, p)?;
            let expected = expected_slope(self.grid.alpha, plan.direction, p);
            let ok = !checked || (fit.slope - expected).abs() <= tol;
            pass &= ok;
            let dir = serde_json::to_value(plan.direction)?.as_str().unwrap_or_default().to_string();
            println!(
                "{dir:<5} slope {:.4} ± {:.4} (expected {expected:.4}, r² {:.4}) {}",
                fit.slope,
                fit.stderr,
                fit.r2,
                if !checked { "" } else if ok { "PASS" } else { "FAIL" }
            );
            slopes.push(vec![
                dir.clone(),
                num(p),
                num(fit.slope),
                num(fit.stderr),
                num(fit.r2),
                num(expected),
                num(fit.slope - expected),
                fit.samples.to_string(),
                ok.to_string(),
            ]);
            for ((l, m), se) in fit.lags.iter().zip(&fit.moments).zip(&fit.moment_stderr) {
                moments.push(vec![dir.clone(), num(*l), num(*m), num(*se)]);
            }
            series.push(Series {
                name: format!("{dir} moments"),
                points: fit.lags.iter().copied().zip(fit.moments.iter().copied()).collect(),
                line: false,
            });
            series.push(Series {
                name: format!("{dir} fit, slope {:.3}", fit.slope),
                points: fit.lags.iter().map(|&l| (l, (fit.intercept + fit.slope * l.ln()).exp())).collect(),
                line: true,
            });
        }
        out.write_csv(
            "slopes.csv",
            &["direction", "p", "slope", "stderr", "r2", "expected", "deviation", "samples", "passed"],
            &slopes,
        )?;
        out.write_csv("moments.csv", &["direction", "lag", "moment", "stderr"], &moments)?;
        plot(
            out,
            ctx,
            "holder.svg",
            Plot {
                title: format!("increment moments, p = {p}"),
                x_label: "lag".into(),
                y_label: "E|Δu|^p".into(),
                log_x: true,
                log_y: true,
                series,
            },
        )?;
        Ok(pass)
    }
}

impl DensityConfig {
    fn point(&self) -> ParabolicPoint {
        self.point.unwrap_or(ParabolicPoint {
            t: self.grid.horizon,
            x: 0.0,
        })
    }
}

impl Experiment for DensityConfig {
    const NAME: &'static str = "density";

    fn set_seed(&mut self, seed: u64) {
        self.seed0 = seed;
    }

    fn seeds(&self) -> Vec<SeedRange> {
        vec![range("trajectories", self.seed0, self.samples)]
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.model.coefficients()?;
        if self.samples < MIN_KDE_SAMPLES {
            return Err(usage(format!("density needs at least {MIN_KDE_SAMPLES} samples")));
        }
        let pt = self.point();
        let g = &self.grid;
        let on_grid = g.step_index(pt.t).is_some_and(|k| (g.time(k) - pt.t).abs() <= 1e-9 * g.dt())
            && g.node_index(pt.x).is_some_and(|j| (g.position(j) - pt.x).abs() <= 1e-9 * g.dx());
        if !on_grid {
            return Err(usage(format!("point ({}, {}) is not a grid node", pt.t, pt.x)));
        }
        if self.axis_points < 2 || !(self.width > 0.0) {
            return Err(usage("axis_points >= 2 and width > 0 required"));
        }
        if !self.pairs.is_empty() {
            if self.model.preset != Preset::Additive || self.model.d != 1 {
                return Err(usage("exact two-point checks need the additive preset with d = 1"));
            }
            if self.pair_grid < 2 || !(self.pair_width > 0.0) || !(self.p > 0.0) {
                return Err(usage("pair_grid >= 2, pair_width > 0 and p > 0 required"));
            }
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let tol = ctx.tolerance.unwrap_or(0.05);
        let alpha = self.grid.alpha;
        let pt = self.point();
        let (k, j) = (
            self.grid.step_index(pt.t).expect("validated"),
            self.grid.node_index(pt.x).expect("validated"),
        );
        let values: Vec<Vec<f64>> = batch_map(&self.model, &self.grid, &seed_list(self.seed0, self.samples), |s| {
            s.point(k, j).to_vec()
        })?;
        // the additive field has the exact law N(0, c_α t^{(α-1)/α}) per component
        let oracle_var = match self.model.preset {
            Preset::Additive => Some(kernel::additive_variance(alpha, pt.t)?),
            _ => None,
        };
        let mut pass = true;
        let (mut rows, mut summary, mut series) = (vec![], vec![], vec![]);
        for c in 0..self.model.d {
            let col: Vec<Vec<f64>> = values.iter().map(|r| vec![r[c]]).collect();
            let n = col.len() as f64;
            let mean = col.iter().map(|r| r[0]).sum::<f64>() / n;
            let sd = (col.iter().map(|r| (r[0] - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let axis = linspace(mean - self.width * sd, mean + self.width * sd, self.axis_points);
            let est = kde_density(&col, vec![axis.clone()], None)?;
            let exact = |z: f64| {
                oracle_var.map(|v| (-z * z / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt())
            };
            let mut sup_err: Option<f64> = None;
            for (z, f) in axis.iter().zip(&est.values) {
                let e = exact(*z);
                if let Some(e) = e {
                    sup_err = Some(sup_err.unwrap_or(0.0).max((f - e).abs()));
                }
                rows.push(vec![c.to_string(), num(*z), num(*f), e.map(num).unwrap_or_default()]);
            }
            let ok = sup_err.map_or(true, |e| e <= tol);
            pass &= ok;
            println!(
                "component {c}: mean {mean:.5} sd {sd:.5} bandwidth {:.5} sup density {:.4}{}",
                est.bandwidth[0],
                est.values.iter().cloned().fold(0.0, f64::max),
                sup_err.map_or(String::new(), |e| format!(
                    " sup error vs exact {e:.4} {}",
                    if ok { "PASS" } else { "FAIL" }
                ))
            );
            summary.push(json!({
                "component": c,
                "mean": mean,
                "sd": sd,
                "bandwidth": est.bandwidth[0],
                "sup_bound": sup_bound(&est),
                "exact_variance": oracle_var,
                "sup_error": sup_err,
                "passed": ok,
            }));
            if c == 0 {
                series.push(Series {
                    name: "KDE".into(),
                    points: axis.iter().copied().zip(est.values.iter().copied()).collect(),
                    line: true,
                });
                if oracle_var.is_some() {
                    series.push(Series {
                        name: "exact normal".into(),
                        points: axis.iter().map(|&z| (z, exact(z).unwrap_or(f64::NAN))).collect(),
                        line: true,
                    });
                }
            }
        }
        out.write_csv("density.csv", &["component", "z", "kde", "exact"], &rows)?;

        let mut pairs_json = serde_json::Value::Null;
        if !self.pairs.is_empty() {
            let pds = self
                .pairs
                .iter()
                .map(|[a, b]| Ok(GaussianPair::new(alpha, *a, *b)?.on_grid(*a, *b, self.pair_grid, self.pair_width)))
                .collect::<Result<Vec<_>>>()?;
            let gauss = gaussian_bound_check(alpha, &pds)?;
            let poly = polynomial_bound_check(alpha, self.p, &pds)?;
            // the polynomial envelope with the dominating constant lies above the Gaussian one
            let big = dominating_polynomial_constant(gauss.c, 1, self.p);
            let dominated = pds.iter().zip(&gauss.deltas).all(|(pd, &delta)| {
                pd.points.iter().all(|z| {
                    let r = (z[0] - z[1]).abs();
                    polynomial_envelope(big, delta, 1, self.p, r) >= gaussian_envelope(gauss.c, delta, 1, r) * (1.0 - 1e-12)
                })
            });
            let ok = gauss.stable && dominated && gauss.c.is_finite();
            pass &= ok;
            println!(
                "two-point envelopes: c = {:.4} (per pair {:?}), stable {}, polynomial c = {:.4}, dominated {} {}",
                gauss.c,
                gauss.constants,
                gauss.stable,
                poly.c,
                dominated,
                if ok { "PASS" } else { "FAIL" }
            );
            let rows: Vec<Vec<String>> = self
                .pairs
                .iter()
                .enumerate()
                .map(|(i, [a, b])| {
                    vec![
                        i.to_string(),
                        num(a.t),
                        num(a.x),
                        num(b.t),
                        num(b.x),
                        num(gauss.deltas[i]),
                        num(gauss.constants[i]),
                        num(poly.constants[i]),
                    ]
                })
                .collect();
            out.write_csv(
                "pairs.csv",
                &["pair", "s", "y", "t", "x", "delta", "gaussian_c", "polynomial_c"],
                &rows,
            )?;
            pairs_json = json!({
                "gaussian": gauss,
                "polynomial": poly,
                "dominating_constant": big,
                "dominated": dominated,
            });
        }
        out.write_json(
            "density.json",
            &json!({ "point": pt, "samples": self.samples, "components": summary, "pairs": pairs_json }),
        )?;
        plot(
            out,
            ctx,
            "density.svg",
            Plot {
                title: format!("density of u_0({}, {})", pt.t, pt.x),
                x_label: "z".into(),
                y_label: "density".into(),
                series,
                ..Default::default()
            },
        )?;
        Ok(pass)
    }
}

impl Experiment for CapacityConfig {
    const NAME: &'static str = "capacity";

    fn validate(&self) -> Result<()> {
        self.target.validate()?;
        if !(self.mesh > 0.0) || !self.beta.is_finite() || self.max_iterations == 0 {
            return Err(usage("capacity needs mesh > 0, finite beta and max_iterations >= 1"));
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let opts = CapacityOptions {
            tol: ctx.tolerance.unwrap_or(CapacityOptions::default().tol),
            max_iterations: self.max_iterations,
        };
        let r = capacity(&self.target, RieszOrder(self.beta), self.mesh, opts)?;
        println!("{}", r.capacity);
        eprintln!(
            "beta {} mesh {}: {} atoms ({} active), energy {}, relative gap {:e}, {} iterations",
            self.beta, self.mesh, r.atoms, r.active_atoms, r.energy, r.relative_gap, r.iterations
        );
        out.write_json("capacity.json", &r)?;
        if let Some(m) = &r.measure {
            let dim = m.dim();
            let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
            header.push("weight".into());
            let rows: Vec<Vec<String>> = m
                .atoms
                .iter()
                .zip(&m.weights)
                .map(|(a, w)| a.iter().map(|v| num(*v)).chain([num(*w)]).collect())
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            out.write_csv("measure.csv", &header, &rows)?;
            if dim == 1 {
                let pts = m.atoms.iter().zip(&m.weights).map(|(a, w)| (a[0], w / self.mesh)).collect();
                plot(
                    out,
                    ctx,
                    "measure.svg",
                    Plot {
                        title: format!("equilibrium measure density, beta = {}", self.beta),
                        x_label: "x".into(),
                        y_label: "weight / mesh".into(),
                        series: vec![Series {
                            name: "minimizer".into(),
                            points: pts,
                            line: true,
                        }],
                        ..Default::default()
                    },
                )?;
            }
        }
        Ok(true)
    }
}

impl Experiment for HausdorffConfig {
    const NAME: &'static str = "hausdorff";

    fn validate(&self) -> Result<()> {
        self.target.validate()?;
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0)) || !self.beta.is_finite() {
            return Err(usage("hausdorff needs a non-empty list of positive eps and a finite beta"));
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let mut rows = vec![];
        let mut pts = vec![];
        for &eps in &self.eps {
            let h = hausdorff_premeasure(&self.target, RieszOrder(self.beta), eps)?;
            println!("eps {eps}: {}", h.value);
            rows.push(vec![
                num(eps),
                num(h.value),
                h.sample_points.to_string(),
                num(h.sample_spacing),
                h.covering.as_ref().map_or(0, |c| c.balls.len()).to_string(),
            ]);
            pts.push((eps, h.value));
        }
        out.write_csv("hausdorff.csv", &["eps", "value", "sample_points", "sample_spacing", "balls"], &rows)?;
        plot(
            out,
            ctx,
            "hausdorff.svg",
            Plot {
                title: format!("Hausdorff pre-measure, beta = {}", self.beta),
                x_label: "eps".into(),
                y_label: "value".into(),
                log_x: true,
                log_y: true,
                series: vec![Series {
                    name: "pre-measure".into(),
                    points: pts,
                    line: true,
                }],
            },
        )?;
        Ok(true)
    }
}

impl Experiment for HittingConfig {
    const NAME: &'static str = "hitting";

    fn set_seed(&mut self, seed: u64) {
        if let Some(e) = &mut self.experiment {
            e.seed0 = seed;
        }
        if let Some(s) = &mut self.small_ball {
            s.seed0 = seed;
        }
    }

    fn seeds(&self) -> Vec<SeedRange> {
        let mut v = vec![];
        if let Some(e) = &self.experiment {
            v.push(range("hitting", e.seed0, e.n_samples));
        }
        if let Some(s) = &self.small_ball {
            v.push(range("small-ball", s.seed0, s.n_samples));
        }
        v
    }

    fn validate(&self) -> Result<()> {
        if self.experiment.is_none() && self.small_ball.is_none() {
            return Err(usage("hitting needs an [experiment] or a [small_ball] section"));
        }
        if let Some(e) = &self.experiment {
            e.validate()?;
        }
        if let Some(s) = &self.small_ball {
            if s.levels.len() < 3 || s.z.len() != s.d {
                return Err(usage("small_ball needs at least 3 levels and z of length d"));
            }
        }
        Ok(())
    }

    fn run(&self, ctx: &Ctx, out: &mut Output) -> Result<bool> {
        let mut pass = true;
        if let Some(e) = &self.experiment {
            let r = match hitting_probability_mc(e) {
                Ok(r) => r,
                Err(err) => {
                    if let Error::Partial { completed, hits, .. } = &err {
                        out.write_json("partial.json", &json!({ "completed": completed, "hits": hits }))?;
                    }
                    return Err(err.into());
                }
            };
            let bounds = bound_comparison(&r);
            println!(
                "hitting: {}/{} = {:.4}, 95% CI [{:.4}, {:.4}], dilation {:.4e}; hits at δ/2 {}, at 2δ {}",
                r.hit_count, r.n, r.estimate, r.wilson_ci.lo, r.wilson_ci.hi, r.dilation, r.half_dilation.hits, r.double_dilation.hits
            );
            println!(
                "threshold {:.4}: capacity {}, Hausdorff {}, lower constant {:?}",
                r.threshold, r.capacity_value, r.hausdorff_value, bounds.lower_constant
            );
            out.write_json("hitting.json", &json!({ "result": r, "bounds": bounds }))?;
            let rows: Vec<Vec<String>> = r
                .distances
                .iter()
                .enumerate()
                .map(|(i, d)| vec![(e.seed0 + i as u64).to_string(), num(*d), (*d <= r.dilation).to_string()])
                .collect();
            out.write_csv("distances.csv", &["seed", "distance", "hit"], &rows)?;
            let sens = [&r.half_dilation, &r.double_dilation];
            let mut pts: Vec<(f64, f64)> = sens.iter().map(|s| (s.dilation, s.estimate)).collect();
            pts.insert(1, (r.dilation, r.estimate));
            plot(
                out,
                ctx,
                "hitting.svg",
                Plot {
                    title: "hit frequency against dilation".into(),
                    x_label: "dilation".into(),
                    y_label: "frequency".into(),
                    log_x: true,
                    series: vec![Series {
                        name: "estimate".into(),
                        points: pts,
                        line: true,
                    }],
                    ..Default::default()
                },
            )?;
        }
        if let Some(s) = &self.small_ball {
            let setup = match ctx.tolerance {
                Some(eta) => fracheat::hitting::SmallBallSetup {
                    eta_report: eta,
                    ..s.clone()
                },
                None => s.clone(),
            };
            let fit = small_ball_scaling(&setup)?;
            pass &= fit.passes;
            println!(
                "small-ball exponent {:.4} ± {:.4} (need >= {}) {}",
                fit.exponent,
                fit.stderr,
                setup.d as f64 - setup.eta_report,
                if fit.passes { "PASS" } else { "FAIL" }
            );
            let rows: Vec<Vec<String>> = fit
                .levels
                .iter()
                .map(|l| {
                    vec![
                        l.n.to_string(),
                        num(l.radius),
                        l.hits.to_string(),
                        l.samples.to_string(),
                        num(l.frequency),
                        num(l.ci.lo),
                        num(l.ci.hi),
                        l.excluded.to_string(),
                    ]
                })
                .collect();
            out.write_csv(
                "small_ball.csv",
                &["level", "radius", "hits", "samples", "frequency", "ci_lo", "ci_hi", "excluded"],
                &rows,
            )?;
            out.write_json("small_ball.json", &fit)?;
            plot(
                out,
                ctx,
                "small_ball.svg",
                Plot {
                    title: format!("small-ball ladder, exponent {:.3}", fit.exponent),
                    x_label: "level n".into(),
                    y_label: "hit frequency".into(),
                    log_y: true,
                    series: vec![Series {
                        name: "frequency".into(),
                        points: fit.levels.iter().map(|l| (l.n as f64, l.frequency)).collect(),
                        line: true,
                    }],
                    ..Default::default()
                },
            )?;
        }
        Ok(pass)
    }
}
