//! Sample-path statistics: increment moments, Hölder fits, density
//! estimation and two-point density envelopes.

mod bounds;
mod holder;
mod kde;

pub use bounds::{
    dominating_polynomial_constant, fit_constant, gaussian_bound_check, gaussian_envelope, polynomial_bound_check,
    polynomial_envelope, sup_bound, BoundCheck, GaussianPair, PairDensity,
};
pub use holder::{
    expected_slope, holder_fit, holder_fit_samples, increment_moments, lag_moments, linear_fit, mean_and_stderr,
    Direction, HolderFit, LagPlan, MomentEstimate, MIN_LAG_CELLS,
};
pub use kde::{kde_density, kde_density_pair, linspace, silverman_bandwidth, DensityEstimate, Kde, MIN_KDE_SAMPLES};

use serde::Serialize;

/// Two-sided confidence interval for a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `hits` successes out of `n` trials.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    // the endpoints are exactly 0 and 1 in these cases; avoid rounding residue
    Interval {
        lo: if hits == 0 { 0.0 } else { (center - half).max(0.0) },
        hi: if hits == n { 1.0 } else { (center + half).min(1.0) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100: textbook Wilson interval (0.0552, 0.1744)
        let i = wilson_interval(10, 100, Z_95);
        assert!((i.lo - 0.05523).abs() < 1e-4 && (i.hi - 0.17437).abs() < 1e-4);
        let i = wilson_interval(0, 50, Z_95);
        assert_eq!(i.lo, 0.0);
        assert!(i.hi > 0.0 && i.hi < 0.1);
        let i = wilson_interval(50, 50, Z_95);
        assert!((i.hi - 1.0).abs() < 1e-12 && i.lo < 1.0);
    }
}
