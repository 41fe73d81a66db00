use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_KDE_SAMPLES: usize = 1000;

/// Product-Gaussian kernel density estimator.
#[derive(Debug, Clone)]
pub struct Kde {
    dim: usize,
    data: Vec<f64>,
    bandwidth: Vec<f64>,
}

/// Silverman's rule per dimension: `h_i = σ_i (4 / ((d + 2) n))^{1/(d+4)}`.
pub fn silverman_bandwidth(data: &[f64], dim: usize) -> Vec<f64> {
    let n = data.len() / dim;
    let nf = n as f64;
    let factor = (4.0 / ((dim as f64 + 2.0) * nf)).powf(1.0 / (dim as f64 + 4.0));
    (0..dim)
        .map(|i| {
            let m = (0..n).map(|r| data[r * dim + i]).sum::<f64>() / nf;
            let v = (0..n).map(|r| (data[r * dim + i] - m).powi(2)).sum::<f64>() / (nf - 1.0);
            v.sqrt() * factor
        })
        .collect()
}

impl Kde {
    /// `data` holds `n` rows of `dim` coordinates. The bandwidth defaults to
    /// Silverman's rule.
    pub fn new(data: Vec<f64>, dim: usize, bandwidth: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(Error::domain("sample array is not a whole number of rows"));
        }
        let n = data.len() / dim;
        if n < MIN_KDE_SAMPLES {
            return Err(Error::domain(format!(
                "density estimation needs at least {MIN_KDE_SAMPLES} samples, got {n}"
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("samples must be finite"));
        }
        let bandwidth = match bandwidth {
            Some(b) => {
                if b.len() != dim || b.iter().any(|h| !(*h > 0.0)) {
                    return Err(Error::domain("bandwidth must have one positive entry per dimension"));
                }
                b
            }
            None => silverman_bandwidth(&data, dim),
        };
        if bandwidth.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::domain("degenerate sample: zero spread in some dimension"));
        }
        Ok(Kde { dim, data, bandwidth })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn density(&self, z: &[f64]) -> f64 {
        let norm: f64 = self
            .bandwidth
            .iter()
            .map(|h| 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt()))
            .product();
        let mut acc = 0.0;
        for row in self.data.chunks_exact(self.dim) {
            let mut q = 0.0;
            for i in 0..self.dim {
                let u = (z[i] - row[i]) / self.bandwidth[i];
                q += u * u;
            }
            if q < 80.0 {
                acc += (-0.5 * q).exp();
            }
        }
        acc * norm / self.n() as f64
    }
}

/// Density values on a tensor grid; `values` is row-major over `axes`.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    pub axes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub bandwidth: Vec<f64>,
    pub n: usize,
}

impl DensityEstimate {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Grid point for flat index `i`.
    pub fn point(&self, mut i: usize) -> Vec<f64> {
        let mut z = vec![0.0; self.axes.len()];
        for (a, axis) in self.axes.iter().enumerate().rev() {
            z[a] = axis[i % axis.len()];
            i /= axis.len();
        }
        z
    }

    /// Tensor-product trapezoid integral of the values over the grid.
    pub fn trapezoid_integral(&self) -> f64 {
        let weights: Vec<Vec<f64>> = self.axes.iter().map(|a| trapezoid_weights(a)).collect();
        let mut total = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let mut w = 1.0;
            let mut r = i;
            for weight in weights.iter().rev() {
                w *= weight[r % weight.len()];
                r /= weight.len();
            }
            total += w * v;
        }
        total
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = axis[i + 1] - axis[i];
        w[i] += h / 2.0;
        w[i + 1] += h / 2.0;
    }
    w
}

fn evaluate(kde: &Kde, axes: Vec<Vec<f64>>) -> Result<DensityEstimate> {
    if axes.len() != kde.dim() || axes.iter().any(|a| a.is_empty()) {
        return Err(Error::domain("one non-empty axis per dimension required"));
    }
    let total: usize = axes.iter().map(|a| a.len()).product();
    let proto = DensityEstimate {
        axes,
        values: vec![],
        bandwidth: kde.bandwidth().to_vec(),
        n: kde.n(),
    };
    let values = (0..total)
        .into_par_iter()
        .map(|i| kde.density(&proto.point(i)))
        .collect();
    Ok(DensityEstimate { values, ..proto })
}

/// One-point density of `u(t, x)` from `n × d` samples, on the tensor grid `axes`.
pub fn kde_density(samples: &[Vec<f64>], axes: Vec<Vec<f64>>, bandwidth: Option<Vec<f64>>) -> Result<DensityEstimate> {
    let dim = samples.first().map(|r| r.len()).unwrap_or(0);
    if samples.iter().any(|r| r.len() != dim) {
        return Err(Error::domain("ragged sample rows"));
    }
    let data: Vec<f64> = samples.iter().flatten().copied().collect();
    let kde = Kde::new(data, dim, bandwidth)?;
    evaluate(&kde, axes)
}

/// Joint density of `(u(s, y), u(t, x))` in `ℝ^{2d}`, `d ≤ 3`.
pub fn kde_density_pair(
    first: &[Vec<f64>],
    second: &[Vec<f64>],
    axes: Vec<Vec<f64>>,
    bandwidth: Option<Vec<f64>>,
) -> Result<DensityEstimate> {
    if first.len() != second.len() {
        return Err(Error::domain("paired samples must have equal length"));
    }
    let d = first.first().map(|r| r.len()).unwrap_or(0);
    if d == 0 || d > 3 {
        return Err(Error::domain(format!("pair densities support 1 <= d <= 3, got {d}")));
    }
    let rows: Vec<Vec<f64>> = first
        .iter()
        .zip(second)
        .map(|(a, b)| a.iter().chain(b.iter()).copied().collect())
        .collect();
    kde_density(&rows, axes, bandwidth)
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
