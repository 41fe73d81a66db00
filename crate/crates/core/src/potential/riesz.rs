//! Riesz kernels, discrete measures and their energies.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breakpoints, QuadOptions};

/// Order `β` of the kernel `K_β`; every real is valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RieszOrder(pub f64);

impl RieszOrder {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `K_β(r)`: `r^{-β}` for `β > 0`, `log(max(1/r, e))` for `β = 0`, `1` for `β < 0`.
pub fn k_kernel(beta: RieszOrder, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("kernel argument must be non-negative, got {r}")));
    }
    Ok(kernel_unchecked(beta.0, r))
}

pub(crate) fn kernel_unchecked(beta: f64, r: f64) -> f64 {
    if beta > 0.0 {
        if r == 0.0 {
            f64::INFINITY
        } else {
            r.powf(-beta)
        }
    } else if beta == 0.0 {
        if r == 0.0 {
            f64::INFINITY
        } else {
            (-r.ln()).max(1.0)
        }
    } else {
        1.0
    }
}

/// Probability measure with finitely many atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::domain("need one weight per atom and at least one atom"));
        }
        let d = atoms[0].len();
        if d == 0 || atoms.iter().any(|a| a.len() != d || a.iter().any(|v| !v.is_finite())) {
            return Err(Error::domain("atoms must be finite points of a common dimension"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::domain("weights must be non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Equal weights on the given atoms.
    pub fn uniform(atoms: Vec<Vec<f64>>) -> Result<Self> {
        let n = atoms.len().max(1);
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Which atom pairs enter the energy double sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyMode {
    /// All pairs, so any charged atom makes the energy infinite when `β ≥ 0`.
    #[default]
    Full,
    /// Distinct atoms only, for mesh-limit computations that add their own
    /// diagonal.
    OffDiagonal,
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `I_β(μ) = Σ_i Σ_j K_β(‖x_i - x_j‖) μ_i μ_j`.
pub fn energy(mu: &DiscreteMeasure, beta: RieszOrder, mode: EnergyMode) -> f64 {
    let b = beta.0;
    if b < 0.0 {
        return match mode {
            EnergyMode::Full => 1.0,
            EnergyMode::OffDiagonal => 1.0 - mu.weights.iter().map(|w| w * w).sum::<f64>(),
        };
    }
    (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let wi = mu.weights[i];
            if wi == 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for j in 0..mu.len() {
                let wj = mu.weights[j];
                if wj == 0.0 || (i == j && mode == EnergyMode::OffDiagonal) {
                    continue;
                }
                acc += wj * kernel_unchecked(b, distance(&mu.atoms[i], &mu.atoms[j]));
            }
            wi * acc
        })
        .collect::<Vec<f64>>()
        // sequential sum: the result must not depend on the worker count
        .iter()
        .sum()
}

/// `∫_0^R K(r) r^m dr` for the kernel `r^{-β}` (`β ≠ 0`, any sign) or the
/// log kernel (`β = 0`). Requires `m + 1 > β`.
fn radial_moment(beta: f64, m: f64, r: f64) -> f64 {
    if beta == 0.0 {
        // max(-ln ρ, 1) switches branch at ρ = 1/e
        let r0 = (-1.0f64).exp();
        let x = r.min(r0);
        let m1 = m + 1.0;
        let mut v = x.powf(m1) * (-x.ln() / m1 + 1.0 / (m1 * m1));
        if r > r0 {
            v += (r.powf(m1) - r0.powf(m1)) / m1;
        }
        v
    } else {
        r.powf(m + 1.0 - beta) / (m + 1.0 - beta)
    }
}

/// Mean of `K(‖X - Y‖)` for `X, Y` independent uniform on an axis-aligned
/// box with the given positive side lengths, with `K(r) = r^{-β}` for
/// `β ≠ 0` and the log kernel for `β = 0`. Requires `β < k` where `k` is the
/// number of sides; `k ≤ 3`.
pub(crate) fn mean_kernel_on_box(beta: f64, widths: &[f64]) -> Result<f64> {
    let k = widths.len();
    if !(1..=3).contains(&k) {
        return Err(Error::domain(format!(
            "cell self-energy is implemented for cells of dimension 1 to 3, got {k}"
        )));
    }
    if beta >= k as f64 {
        return Ok(f64::INFINITY);
    }
    // X - Y has density ∏(1 - |z_i|/w_i)/w_i on the doubled box; fold onto the
    // positive orthant and go polar: the radial integral is closed-form after
    // expanding the product, the angular one is numeric.
    let vol: f64 = widths.iter().product();
    let prefactor = 2f64.powi(k as i32) / vol;
    let radial = |u: &[f64]| -> f64 {
        let reach = widths
            .iter()
            .zip(u)
            .map(|(w, ui)| if *ui > 0.0 { w / ui } else { f64::INFINITY })
            .fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for mask in 0u32..(1 << k) {
            let mut coef = 1.0;
            for i in 0..k {
                if mask & (1 << i) != 0 {
                    coef *= -u[i] / widths[i];
                }
            }
            if coef == 0.0 {
                continue;
            }
            let m = (k - 1) as f64 + mask.count_ones() as f64;
            total += coef * radial_moment(beta, m, reach);
        }
        total
    };
    let opts = QuadOptions::with_tolerances(1e-13, 1e-11);
    let value = match k {
        1 => radial(&[1.0]),
        2 => {
            let kink = widths[1].atan2(widths[0]);
            integrate_with_breakpoints(|t| radial(&[t.cos(), t.sin()]), &[0.0, kink, FRAC_PI_2], opts)?.value
        }
        _ => {
            let kink_phi = widths[1].atan2(widths[0]);
            let outer = |phi: f64| -> Result<f64> {
                let (c, s) = (phi.cos(), phi.sin());
                let side = (c / widths[0]).max(s / widths[1]);
                // the top face takes over where cos θ / w₃ = sin θ · side
                let kink_theta = (1.0 / widths[2]).atan2(side);
                Ok(integrate_with_breakpoints(
                    |th: f64| {
                        let st = th.sin();
                        st * radial(&[st * c, st * s, th.cos()])
                    },
                    &[0.0, kink_theta, FRAC_PI_2],
                    opts,
                )?
                .value)
            };
            let mut err = None;
            let v = integrate_with_breakpoints(
                |phi| match outer(phi) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                &[0.0, kink_phi, FRAC_PI_2],
                opts,
            )?
            .value;
            if let Some(e) = err {
                return Err(e);
            }
            v
        }
    };
    Ok(prefactor * value)
}

/// Energy of the uniform probability measure on a mesh cell with the given
/// side lengths; zero sides mark degenerate directions. Infinite when the
/// order reaches the cell's dimension.
pub fn cell_self_energy(beta: RieszOrder, widths: &[f64]) -> Result<f64> {
    if widths.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("cell widths must be finite and non-negative"));
    }
    if beta.0 < 0.0 {
        return Ok(1.0);
    }
    let sides: Vec<f64> = widths.iter().copied().filter(|w| *w > 0.0).collect();
    if sides.is_empty() {
        return Ok(f64::INFINITY);
    }
    mean_kernel_on_box(beta.0, &sides)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(k_kernel(RieszOrder(1.0), 0.5).unwrap(), 2.0);
        assert_eq!(k_kernel(RieszOrder(0.0), 10.0).unwrap(), 1.0);
        assert_eq!(k_kernel(RieszOrder(-3.0), 0.0).unwrap(), 1.0);
        assert!(k_kernel(RieszOrder(0.5), -1.0).is_err());
        assert!((k_kernel(RieszOrder(0.0), 0.01).unwrap() - 100f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn interval_self_energy_closed_form() {
        for beta in [0.2, 0.5, 0.9] {
            let w: f64 = 0.3;
            let exact = 2.0 * w.powf(-beta) / ((1.0 - beta) * (2.0 - beta));
            let v = cell_self_energy(RieszOrder(beta), &[w]).unwrap();
            assert!((v / exact - 1.0).abs() < 1e-13);
        }
        // log kernel on a short cell: -ln w + 3/2
        let v = cell_self_energy(RieszOrder(0.0), &[0.01]).unwrap();
        assert!((v - (100f64.ln() + 1.5)).abs() < 1e-12);
        assert_eq!(cell_self_energy(RieszOrder(1.0), &[0.1]).unwrap(), f64::INFINITY);
        assert_eq!(cell_self_energy(RieszOrder(0.0), &[0.0, 0.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn mean_distance_in_square_and_cube() {
        // classical box line-picking constants
        let sq = mean_kernel_on_box(-1.0, &[1.0, 1.0]).unwrap();
        let sq_exact = (2.0 + 2f64.sqrt() + 5.0 * (1.0 + 2f64.sqrt()).ln()) / 15.0;
        assert!((sq - sq_exact).abs() < 1e-10, "{sq}");
        let cube = mean_kernel_on_box(-1.0, &[1.0, 1.0, 1.0]).unwrap();
        assert!((cube - 0.661_707_182_267_176).abs() < 1e-9, "{cube}");
    }

    #[test]
    fn degenerate_cell_uses_lower_dimension() {
        let a = cell_self_energy(RieszOrder(0.5), &[0.2, 0.0]).unwrap();
        let b = cell_self_energy(RieszOrder(0.5), &[0.2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn energy_conventions() {
        let mu = DiscreteMeasure::new(vec![vec![0.0], vec![1.0]], vec![0.25, 0.75]).unwrap();
        assert_eq!(energy(&mu, RieszOrder(-1.0), EnergyMode::Full), 1.0);
        assert_eq!(energy(&mu, RieszOrder(1.0), EnergyMode::Full), f64::INFINITY);
        let off = energy(&mu, RieszOrder(1.0), EnergyMode::OffDiagonal);
        assert!((off - 2.0 * 0.25 * 0.75).abs() < 1e-15);
        let single = DiscreteMeasure::uniform(vec![vec![0.3, 0.1]]).unwrap();
        assert_eq!(energy(&single, RieszOrder(1.0), EnergyMode::Full), f64::INFINITY);
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![0.5]).is_err());
    }
}
