//! Named numerical identities of the Green kernel, evaluated against
//! independent oracles. Shared by the `kernel-check` command and the
//! acceptance suite.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::kernel::{self, Alpha};
use crate::quad::QuadOptions;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub alpha: f64,
    pub name: &'static str,
    /// Worst error over the check's evaluation points.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn check(alpha: Alpha, name: &'static str, error: f64, tolerance: f64) -> IdentityCheck {
    IdentityCheck {
        alpha: alpha.value(),
        name,
        error,
        tolerance,
        passed: error <= tolerance,
    }
}

/// Default relative tolerance of the scaling, semigroup and squared-mass checks.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-6;

fn convolve(a: Alpha, t: f64, s: f64, x: f64) -> Result<f64> {
    let f = |y: f64| kernel::green_kernel(a, t, x - y).unwrap_or(f64::NAN) * kernel::green_kernel(a, s, y).unwrap_or(f64::NAN);
    kernel::integrate_real_line(f, 0.0, &[0.0, x, x / 2.0], QuadOptions::with_tolerances(1e-14, 1e-10))
}

/// Scaling, semigroup, unit mass, squared-mass identity, tail bound, ζ and Ψ
/// checks at one α; the Gaussian closed forms are added at α = 2.
/// `rel_tol` applies to the identities that hold exactly in exact arithmetic.
pub fn kernel_identity_suite(alpha: Alpha, rel_tol: f64) -> Result<Vec<IdentityCheck>> {
    let a = alpha.value();
    let mut out = vec![];

    let mut worst: f64 = 0.0;
    for t in [0.05, 0.5, 3.0, 20.0] {
        for x in [0.0, 0.3, 2.0, 9.0] {
            let lhs = kernel::green_kernel(alpha, t, x)?;
            let s = t.powf(-1.0 / a);
            let rhs = s * kernel::green_kernel(alpha, 1.0, x * s)?;
            worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
        }
    }
    out.push(check(alpha, "scaling", worst, rel_tol));

    let mut worst: f64 = 0.0;
    for (t, s) in [(0.5, 0.5), (0.2, 1.3), (2.0, 0.1)] {
        for x in [0.0, 0.8, 3.0] {
            let lhs = convolve(alpha, t, s, x)?;
            let rhs = kernel::green_kernel(alpha, t + s, x)?;
            worst = worst.max((lhs - rhs).abs() / rhs);
        }
    }
    out.push(check(alpha, "semigroup", worst, rel_tol));

    let mut worst: f64 = 0.0;
    for t in [0.1, 1.0, 5.0] {
        let m = kernel::integrate_real_line(
            |y| kernel::green_kernel(alpha, t, y).unwrap_or(f64::NAN),
            0.0,
            &[],
            QuadOptions::with_tolerances(1e-13, 1e-11),
        )?;
        worst = worst.max((m - 1.0).abs());
    }
    out.push(check(alpha, "unit-mass", worst, 1e-8));

    let c = kernel::squared_mass_constant(alpha)?;
    let th = alpha.time_exponent();
    let mut worst: f64 = 0.0;
    for (lo, hi, t) in [(0.0, 1.0, 1.0), (0.2, 0.7, 1.0), (0.0, 0.3, 2.0), (0.5, 2.0, 2.0), (0.1, 0.15, 0.4)] {
        let q = kernel::squared_mass_integral(alpha, lo, hi, t)?;
        let closed = c * ((t - lo).powf(th) - (t - hi).powf(th));
        worst = worst.max((q - closed).abs() / closed);
    }
    out.push(check(alpha, "squared-mass", worst, rel_tol));

    // G(1, x)(1 + |x|^{1+α}) / K must stay at most 1; off the fitting grid
    let k = kernel::tail_constant(alpha)?;
    let g0 = kernel::green_kernel(alpha, 1.0, 0.0)?;
    let (mut excess, mut x): (f64, f64) = (0.0, 0.0037);
    while x < 5e4 {
        let g = kernel::green_kernel(alpha, 1.0, x)?;
        excess = excess.max(g * (1.0 + x.powf(1.0 + a)) / k - 1.0).max(g - g0);
        x = if x < 50.0 { x + 0.0731 } else { x * 1.37 };
    }
    out.push(check(alpha, "tail-bound", excess.max(0.0), 0.0));

    let m = kernel::zeta_min(alpha)?;
    let mut brute = f64::INFINITY;
    for i in 0..=1_000_000 {
        brute = brute.min(kernel::zeta(alpha, i as f64 * 1e-4)?);
    }
    out.push(check(alpha, "zeta-min", (m.interval_value - brute).abs(), 1e-6));
    out.push(check(alpha, "zeta-positive", if m.value > 0.0 { 0.0 } else { 1.0 }, 0.0));

    let (pa, nu, rho) = (2.0, 1.5, 0.1);
    let n = 200_000;
    let h = pa / n as f64;
    let riemann: f64 = (0..n)
        .map(|i| 1.0 / (rho + ((i as f64 + 0.5) * h).powf(nu)))
        .sum::<f64>()
        * h;
    out.push(check(alpha, "psi", (kernel::psi(pa, nu, rho)? - riemann).abs(), 1e-8));

    if alpha.is_gaussian() {
        let mut worst: f64 = 0.0;
        for t in [0.01, 0.3, 1.0, 7.0] {
            for x in [0.0, 0.05, 0.7, 2.0, 5.0] {
                let q = kernel::green_kernel_quadrature(alpha, t, x)?;
                let exact = (4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp();
                worst = worst.max((q - exact).abs());
            }
        }
        out.push(check(alpha, "gaussian-closed-form", worst, 1e-8));
        out.push(check(alpha, "gaussian-c-alpha", (c - 1.0 / (2.0 * PI).sqrt()).abs(), 1e-10));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_suite_passes() {
        let r = kernel_identity_suite(Alpha::new(2.0).unwrap(), DEFAULT_RELATIVE_TOLERANCE).unwrap();
        assert!(r.iter().any(|c| c.name == "gaussian-closed-form"));
        for c in &r {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn impossible_tolerance_fails() {
        let r = kernel_identity_suite(Alpha::new(1.5).unwrap(), 0.0).unwrap();
        assert!(r.iter().any(|c| !c.passed));
    }
}
