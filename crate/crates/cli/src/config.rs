//! Experiment configs. One document per run, TOML or JSON; every section is
//! optional and falls back to a small desk-scale default, but unknown keys
//! are rejected.

use std::path::Path;

use anyhow::{Context, Result};
use fracheat::hitting::{HittingExperiment, HittingMode, SmallBallMethod, SmallBallSetup};
use fracheat::potential::{CompactSetSpec, Window};
use fracheat::stats::Direction;
use fracheat::{Alpha, ModelSpec, ParabolicPoint, Preset, Scheme, SolverGrid};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::UsageError;

/// Parse a config file; the format follows the extension (`.json`, else TOML).
pub fn load<C: DeserializeOwned>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())).into())
}

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).expect("default alpha is valid")
}

fn grid(a: f64, horizon: f64, half_width: f64, nt: usize, nx: usize) -> SolverGrid {
    SolverGrid::new(alpha(a), horizon, half_width, nt, nx).expect("default grid is valid")
}

fn additive() -> ModelSpec {
    ModelSpec::new(1, Preset::Additive)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelCheckConfig {
    pub alphas: Vec<Alpha>,
}

impl Default for KernelCheckConfig {
    fn default() -> Self {
        KernelCheckConfig {
            alphas: [1.2, 1.5, 1.8, 2.0].into_iter().map(alpha).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub model: ModelSpec,
    pub grid: SolverGrid,
    pub seed0: u64,
    /// Trajectories summarized in `summary.csv`.
    pub samples: usize,
    /// Leading trajectories also written in full (CSV and snapshot).
    pub export: usize,
    pub t_stride: usize,
    pub x_stride: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            model: additive(),
            grid: grid(2.0, 1.0, 4.0, 64, 128),
            seed0: 0,
            samples: 16,
            export: 1,
            t_stride: 1,
            x_stride: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolderConfig {
    pub model: ModelSpec,
    pub grid: SolverGrid,
    pub seed0: u64,
    pub samples: usize,
    pub p: f64,
    pub directions: Vec<Direction>,
    /// Smallest and largest lag in cells; must span two decades.
    pub min_lag: usize,
    pub max_lag: usize,
    pub lag_count: usize,
}

impl Default for HolderConfig {
    fn default() -> Self {
        HolderConfig {
            model: additive().with_scheme(Scheme::ExactConvolution),
            grid: grid(2.0, 1.0, 2.0, 1024, 8192),
            seed0: 0,
            samples: 24,
            p: 2.0,
            directions: vec![Direction::Time, Direction::Space],
            min_lag: 4,
            max_lag: 400,
            lag_count: 8,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub model: ModelSpec,
    pub grid: SolverGrid,
    pub seed0: u64,
    pub samples: usize,
    /// Where `u` is sampled; defaults to `(T, 0)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<ParabolicPoint>,
    pub axis_points: usize,
    /// Half-width of the density axis in sample standard deviations.
    pub width: f64,
    /// Space-time pairs for the exact two-point envelope fits (additive, d = 1).
    pub pairs: Vec<[ParabolicPoint; 2]>,
    pub pair_grid: usize,
    pub pair_width: f64,
    /// Moment order of the polynomial envelope.
    pub p: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            model: additive().with_scheme(Scheme::ExactConvolution),
            grid: grid(2.0, 1.0, 10.0, 4, 256),
            seed0: 0,
            samples: 10_000,
            point: None,
            axis_points: 201,
            width: 5.0,
            pairs: vec![
                [ParabolicPoint { t: 1.0, x: 0.0 }, ParabolicPoint { t: 1.0, x: 0.25 }],
                [ParabolicPoint { t: 1.0, x: 0.0 }, ParabolicPoint { t: 0.9, x: 0.0 }],
                [ParabolicPoint { t: 0.8, x: -0.5 }, ParabolicPoint { t: 0.7, x: -0.4 }],
            ],
            pair_grid: 50,
            pair_width: 4.0,
            p: 8.0,
        }
    }
}

fn unit_interval() -> CompactSetSpec {
    CompactSetSpec::from_boxes(
        1,
        1.0,
        vec![fracheat::potential::BoxSpec {
            lo: vec![0.0],
            hi: vec![1.0],
        }],
    )
    .expect("default target is valid")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub target: CompactSetSpec,
    pub beta: f64,
    /// Side of the cells the target is discretized into.
    pub mesh: f64,
    pub max_iterations: usize,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            target: unit_interval(),
            beta: 0.5,
            mesh: 1.0 / 256.0,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HausdorffConfig {
    pub target: CompactSetSpec,
    pub beta: f64,
    pub eps: Vec<f64>,
}

impl Default for HausdorffConfig {
    fn default() -> Self {
        HausdorffConfig {
            target: unit_interval(),
            beta: 1.0,
            eps: vec![0.1, 0.05, 0.025, 0.0125],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HittingConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<HittingExperiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_ball: Option<SmallBallSetup>,
}

impl Default for HittingConfig {
    fn default() -> Self {
        HittingConfig {
            experiment: Some(HittingExperiment {
                model: additive(),
                grid: grid(2.0, 1.0, 4.0, 64, 128),
                time: Window { lo: 0.5, hi: 1.0 },
                space: Window { lo: -1.0, hi: 1.0 },
                mode: HittingMode::SpaceTime,
                target: CompactSetSpec::from_points(1, 10.0, vec![vec![0.5]], None).expect("valid"),
                dilation: None,
                n_samples: 2000,
                seed0: 0,
                capacity_mesh: None,
                hausdorff_eps: None,
            }),
            small_ball: Some(SmallBallSetup {
                alpha: alpha(2.0),
                d: 1,
                z: vec![0.0],
                levels: vec![3, 4, 5],
                n_samples: 20_000,
                seed0: 0,
                nodes_per_side: 3,
                eta_report: 0.2,
                method: SmallBallMethod::ExactGaussian { horizon: 1.0 },
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<C: Serialize + DeserializeOwned + Default>() {
        let c = C::default();
        let t = toml::to_string(&c).unwrap();
        let back: C = toml::from_str(&t).unwrap();
        assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&c).unwrap());
    }

    #[test]
    fn defaults_survive_toml() {
        roundtrip::<KernelCheckConfig>();
        roundtrip::<SimulateConfig>();
        roundtrip::<HolderConfig>();
        roundtrip::<DensityConfig>();
        roundtrip::<CapacityConfig>();
        roundtrip::<HausdorffConfig>();
        roundtrip::<HittingConfig>();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<CapacityConfig>("beta = 1.0\nbta = 2.0").is_err());
        assert!(toml::from_str::<SimulateConfig>("[grid]\nalpha = 2.0\nhorizon = 1.0\nhalf_width = 1.0\nnt = 4\nnx = 8\nextra = 1").is_err());
        assert!(toml::from_str::<KernelCheckConfig>("alphas = [2.5]").is_err());
    }
}
