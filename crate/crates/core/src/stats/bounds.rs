//! Two-point density envelopes and the fitting of their constants.

use std::f64::consts::PI;

use serde::Serialize;

use super::kde::DensityEstimate;
use crate::error::{Error, Result};
use crate::kernel::{self, Alpha, ParabolicPoint};

/// `c Δ^{-d} exp(-‖z₁ - z₂‖² / (c Δ²))`.
pub fn gaussian_envelope(c: f64, delta: f64, d: usize, dist: f64) -> f64 {
    c * delta.powi(-(d as i32)) * (-(dist * dist) / (c * delta * delta)).exp()
}

/// `c Δ^{-d} [Δ² / ‖z₁ - z₂‖² ∧ 1]^{p/(4d)}`.
pub fn polynomial_envelope(c: f64, delta: f64, d: usize, p: f64, dist: f64) -> f64 {
    let q = p / (4.0 * d as f64);
    let ratio = if dist == 0.0 {
        1.0
    } else {
        (delta * delta / (dist * dist)).min(1.0)
    };
    c * delta.powi(-(d as i32)) * ratio.powf(q)
}

/// Smallest `C` with `polynomial_envelope(C, ·) ≥ gaussian_envelope(c, ·)`
/// everywhere: `C = c · max(1, sup_{x≥1} x^q e^{-x/c})`, `q = p/(4d)`.
pub fn dominating_polynomial_constant(c: f64, d: usize, p: f64) -> f64 {
    let q = p / (4.0 * d as f64);
    let sup = if q * c >= 1.0 {
        (q * c).powf(q) * (-q).exp()
    } else {
        (-1.0 / c).exp()
    };
    c * sup.max(1.0)
}

/// Density of `(z₁, z₂)` on a grid together with the space-time points.
#[derive(Debug, Clone)]
pub struct PairDensity {
    pub first: ParabolicPoint,
    pub second: ParabolicPoint,
    pub d: usize,
    /// Flat grid points `(z₁, z₂) ∈ ℝ^{2d}` and density values.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl PairDensity {
    pub fn from_estimate(first: ParabolicPoint, second: ParabolicPoint, est: &DensityEstimate) -> Result<Self> {
        if est.dim() % 2 != 0 {
            return Err(Error::domain("pair density must live in an even dimension"));
        }
        let points = (0..est.values.len()).map(|i| est.point(i)).collect();
        Ok(PairDensity {
            first,
            second,
            d: est.dim() / 2,
            points,
            values: est.values.clone(),
        })
    }

    fn separation(&self, i: usize) -> f64 {
        let z = &self.points[i];
        (0..self.d).map(|k| (z[k] - z[k + self.d]).powi(2)).sum::<f64>().sqrt()
    }
}

/// Exact joint law of `(v(s,y), v(t,x))` for the additive field, `d = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianPair {
    pub var_first: f64,
    pub var_second: f64,
    pub covariance: f64,
}

impl GaussianPair {
    pub fn new(alpha: Alpha, first: ParabolicPoint, second: ParabolicPoint) -> Result<Self> {
        if first == second {
            return Err(Error::domain("the two space-time points must differ"));
        }
        let v1 = kernel::additive_variance(alpha, first.t)?;
        let v2 = kernel::additive_variance(alpha, second.t)?;
        // covariance from the exact increment variance: Cov = (V1 + V2 - E|Δ|²)/2
        let (late, early) = if first.t >= second.t { (first, second) } else { (second, first) };
        let inc = kernel::increment_variance_exact(alpha, late, early)?;
        let covariance = 0.5 * (v1 + v2 - inc);
        if v1 * v2 - covariance * covariance <= 0.0 {
            return Err(Error::domain("degenerate joint law"));
        }
        Ok(GaussianPair {
            var_first: v1,
            var_second: v2,
            covariance,
        })
    }

    pub fn correlation(&self) -> f64 {
        self.covariance / (self.var_first * self.var_second).sqrt()
    }

    pub fn density(&self, z1: f64, z2: f64) -> f64 {
        let det = self.var_first * self.var_second - self.covariance * self.covariance;
        let q = (self.var_second * z1 * z1 - 2.0 * self.covariance * z1 * z2 + self.var_first * z2 * z2) / det;
        (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
    }

    /// Tabulate on a `n × n` grid covering `±width` standard deviations.
    pub fn on_grid(&self, first: ParabolicPoint, second: ParabolicPoint, n: usize, width: f64) -> PairDensity {
        let a1 = super::kde::linspace(-width * self.var_first.sqrt(), width * self.var_first.sqrt(), n);
        let a2 = super::kde::linspace(-width * self.var_second.sqrt(), width * self.var_second.sqrt(), n);
        let mut points = Vec::with_capacity(n * n);
        let mut values = Vec::with_capacity(n * n);
        for &z1 in &a1 {
            for &z2 in &a2 {
                points.push(vec![z1, z2]);
                values.push(self.density(z1, z2));
            }
        }
        PairDensity {
            first,
            second,
            d: 1,
            points,
            values,
        }
    }
}

/// Smallest `c ≥ 1` such that `density ≤ envelope(c)` at every grid point;
/// `envelope` must be non-decreasing in `c`.
pub fn fit_constant<F: Fn(f64, usize) -> f64>(n: usize, density: &[f64], envelope: F) -> f64 {
    let holds = |c: f64| (0..n).all(|i| density[i] <= envelope(c, i));
    if holds(1.0) {
        return 1.0;
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while !holds(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    /// Fitted constant per pair of space-time points.
    pub constants: Vec<f64>,
    /// Largest fitted constant; the bound holds on every grid with it.
    pub c: f64,
    /// All constants lie within ±20% of a common value.
    pub stable: bool,
    pub grid_points: usize,
    pub deltas: Vec<f64>,
}

fn stable(cs: &[f64]) -> bool {
    let lo = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = cs.iter().cloned().fold(0.0, f64::max);
    hi.is_finite() && hi <= 1.5 * lo
}

fn check<F>(alpha: Alpha, pairs: &[PairDensity], envelope: F) -> Result<BoundCheck>
where
    F: Fn(f64, f64, usize, f64) -> f64,
{
    if pairs.is_empty() {
        return Err(Error::domain("no density pairs given"));
    }
    let mut constants = vec![];
    let mut deltas = vec![];
    for pd in pairs {
        if pd.first == pd.second {
            return Err(Error::domain("coincident space-time points are excluded"));
        }
        let delta = kernel::delta_metric(alpha, pd.first, pd.second);
        let c = fit_constant(pd.values.len(), &pd.values, |c, i| envelope(c, delta, pd.d, pd.separation(i)));
        constants.push(c);
        deltas.push(delta);
    }
    Ok(BoundCheck {
        c: constants.iter().cloned().fold(0.0, f64::max),
        stable: stable(&constants),
        grid_points: pairs.iter().map(|p| p.values.len()).max().unwrap_or(0),
        constants,
        deltas,
    })
}

/// Fit the Gaussian-type two-point envelope.
pub fn gaussian_bound_check(alpha: Alpha, pairs: &[PairDensity]) -> Result<BoundCheck> {
    check(alpha, pairs, gaussian_envelope)
}

/// Fit the polynomial two-point envelope with exponent `p/(4d)`.
pub fn polynomial_bound_check(alpha: Alpha, p: f64, pairs: &[PairDensity]) -> Result<BoundCheck> {
    if !(p > 0.0) {
        return Err(Error::domain("moment order p must be positive"));
    }
    check(alpha, pairs, |c, delta, d, r| polynomial_envelope(c, delta, d, p, r))
}

/// Smallest `c ≥ 1` with `sup density ≤ c`; the one-point bound.
pub fn sup_bound(est: &DensityEstimate) -> f64 {
    est.values.iter().cloned().fold(0.0, f64::max).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelopes_at_zero_separation() {
        assert_eq!(gaussian_envelope(2.0, 0.5, 1, 0.0), 4.0);
        assert_eq!(polynomial_envelope(2.0, 0.5, 1, 8.0, 0.0), 4.0);
    }

    #[test]
    fn polynomial_tail_slope() {
        let (c, delta, d, p) = (1.5, 0.3, 1, 6.0);
        let r1 = 10.0;
        let r2 = 100.0;
        let s = (polynomial_envelope(c, delta, d, p, r2) / polynomial_envelope(c, delta, d, p, r1)).ln()
            / (r2 / r1).ln();
        assert!((s + p / (2.0 * d as f64)).abs() < 1e-12);
    }

    #[test]
    fn dominating_constant_dominates() {
        for c in [1.0, 1.7, 5.0, 40.0] {
            for p in [1.0, 4.0, 12.0] {
                let big = dominating_polynomial_constant(c, 1, p);
                for i in 0..2000 {
                    let r = i as f64 * 0.01;
                    let g = gaussian_envelope(c, 0.4, 1, r);
                    let q = polynomial_envelope(big, 0.4, 1, p, r);
                    assert!(q >= g * (1.0 - 1e-12), "c {c} p {p} r {r}");
                }
            }
        }
    }

    #[test]
    fn fit_is_minimal() {
        let dens = [0.5, 3.0, 1.0];
        let c = fit_constant(3, &dens, |c, i| c * (i as f64 + 1.0));
        assert!((c - 1.5).abs() < 1e-9);
        assert_eq!(fit_constant(3, &[0.1, 0.1, 0.1], |c, _| c), 1.0);
    }
}
