//! `fracheat`: batch experiments for fractional stochastic heat equations.
//!
//! Exit codes: 0 success, 1 check failure (or i/o failure), 2 usage error,
//! 3 numeric failure.

mod commands;
mod config;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::{execute, execute_named, Ctx, Experiment};
use config::*;
use output::{Manifest, MANIFEST_FILE};

/// Bad command line, config or manifest.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "fracheat", version, about = "Experiments for fractional stochastic heat equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML, or JSON by extension); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: fracheat-out/<command>].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// First seed; overrides the config's seed0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads [default: all cores].
    #[arg(long, global = true, env = "FRACHEAT_WORKERS")]
    workers: Option<usize>,
    /// Check tolerance; its meaning depends on the command (see README).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Skip the SVG plots.
    #[arg(long, global = true)]
    no_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel identities against quadrature and closed-form oracles.
    KernelCheck,
    /// Simulate trajectories and export summaries, CSV rows and snapshots.
    Simulate,
    /// Increment moments and log-log Hölder slopes.
    Holder,
    /// One-point KDE and two-point density envelopes.
    Density,
    /// Riesz capacity of a compact set.
    Capacity,
    /// Hausdorff pre-measure ladder of a compact set.
    Hausdorff,
    /// Monte Carlo hitting probabilities and the small-ball ladder.
    Hitting,
    /// Repeat a run from its manifest and compare the output hashes.
    Rerun {
        /// Path to a manifest.json, or the directory holding it.
        manifest: PathBuf,
    },
}

fn run_command<E: Experiment>(cli: &Cli, ctx: &Ctx, dir: &Path) -> Result<bool> {
    let mut cfg: E = match &cli.config {
        Some(p) => config::load(p)?,
        None => E::default(),
    };
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    execute(&cfg, ctx, dir)
}

fn rerun(cli: &Cli, path: &Path) -> Result<bool> {
    let path = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
    let old = Manifest::read(&path)?;
    let dir = match &cli.out {
        Some(d) => d.clone(),
        None => path.parent().unwrap_or(Path::new(".")).join("rerun"),
    };
    if dir.join(MANIFEST_FILE) == path {
        return Err(UsageError("rerun needs an output directory other than the original".into()).into());
    }
    let ctx = Ctx {
        tolerance: old.tolerance,
        plots: old.plots,
    };
    execute_named(&old.command, old.config.clone(), &ctx, &dir)?;
    let new = Manifest::read(&dir.join(MANIFEST_FILE)).context("reading the rerun manifest")?;
    let mut same = new.outputs.len() == old.outputs.len();
    for (a, b) in old.outputs.iter().zip(&new.outputs) {
        let ok = a == b;
        same &= ok;
        println!("{} {}", if ok { "identical" } else { "DIFFERS  " }, a.file);
    }
    same &= new.status == old.status && new.config_sha256 == old.config_sha256;
    println!("{}", if same { "rerun is byte-identical" } else { "rerun DIFFERS from the manifest" });
    Ok(same)
}

/// Map an error to its exit code.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(fe) = cause.downcast_ref::<fracheat::Error>() {
            return core_code(fe);
        }
    }
    1
}

fn core_code(e: &fracheat::Error) -> u8 {
    use fracheat::Error::*;
    match e {
        Domain(_) | Format(_) | Json(_) => 2,
        Trajectory { source, .. } | Partial { source, .. } => core_code(source),
        _ if e.is_numeric() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let ctx = Ctx {
        tolerance: cli.tolerance,
        plots: !cli.no_plots,
    };
    let name = match &cli.command {
        Command::KernelCheck => KernelCheckConfig::NAME,
        Command::Simulate => SimulateConfig::NAME,
        Command::Holder => HolderConfig::NAME,
        Command::Density => DensityConfig::NAME,
        Command::Capacity => CapacityConfig::NAME,
        Command::Hausdorff => HausdorffConfig::NAME,
        Command::Hitting => HittingConfig::NAME,
        Command::Rerun { .. } => "rerun",
    };
    let dir = cli.out.clone().unwrap_or_else(|| Path::new("fracheat-out").join(name));
    let result = match &cli.command {
        Command::KernelCheck => run_command::<KernelCheckConfig>(&cli, &ctx, &dir),
        Command::Simulate => run_command::<SimulateConfig>(&cli, &ctx, &dir),
        Command::Holder => run_command::<HolderConfig>(&cli, &ctx, &dir),
        Command::Density => run_command::<DensityConfig>(&cli, &ctx, &dir),
        Command::Capacity => run_command::<CapacityConfig>(&cli, &ctx, &dir),
        Command::Hausdorff => run_command::<HausdorffConfig>(&cli, &ctx, &dir),
        Command::Hitting => run_command::<HittingConfig>(&cli, &ctx, &dir),
        Command::Rerun { manifest } => rerun(&cli, manifest),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed; see {}", dir.display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
