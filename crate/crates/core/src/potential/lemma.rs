//! Anisotropic dyadic grids, critical dimensions and the quadruple-integral
//! bound behind the hitting estimates.

use serde::{Deserialize, Serialize};

use super::riesz::kernel_unchecked;
use crate::error::{Error, Result};
use crate::kernel::Alpha;
use crate::quad::{integrate, integrate_with_breakpoints, QuadOptions};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!("[{lo}, {hi}] is not a bounded interval")));
        }
        Ok(Window { lo, hi })
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// `R^n_{k,l} = [t_k, t_{k+1}] × [x_l, x_{l+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rectangle {
    pub k: i64,
    pub l: i64,
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnisotropicGrid {
    pub n: u32,
    pub time_step: f64,
    pub space_step: f64,
    pub rectangles: Vec<Rectangle>,
}

/// Time and space steps of level `n`: `2^{-2nα/(α-1)}` and `2^{-2n/(α-1)}`.
pub fn anisotropic_steps(alpha: Alpha, n: u32) -> (f64, f64) {
    let a = alpha.value();
    (
        2f64.powf(-2.0 * n as f64 * a / (a - 1.0)),
        2f64.powf(-2.0 * n as f64 / (a - 1.0)),
    )
}

/// Cap on the number of rectangles generated.
pub const MAX_RECTANGLES: usize = 50_000_000;

/// All level-`n` rectangles meeting `I × J` in a set of positive area.
pub fn anisotropic_grid(alpha: Alpha, n: u32, time: Window, space: Window) -> Result<AnisotropicGrid> {
    if n < 1 {
        return Err(Error::domain("grid level n must be at least 1"));
    }
    let (dt, dx) = anisotropic_steps(alpha, n);
    let range = |w: Window, h: f64| -> (i64, i64) {
        // indices k with (k h, (k+1) h) ∩ (lo, hi) ≠ ∅
        let first = (w.lo / h).floor() as i64;
        let last = (w.hi / h).ceil() as i64 - 1;
        (first, last)
    };
    let (k0, k1) = range(time, dt);
    let (l0, l1) = range(space, dx);
    let count = ((k1 - k0 + 1) as u128) * ((l1 - l0 + 1) as u128);
    if count > MAX_RECTANGLES as u128 {
        return Err(Error::domain(format!("level {n} needs {count} rectangles, above the cap")));
    }
    let a = alpha.value();
    let bound = (time.len() + 2.0) * (space.len() + 2.0) * 2f64.powf(2.0 * n as f64 * (a + 1.0) / (a - 1.0));
    assert!(count as f64 <= bound, "rectangle count exceeds its a priori bound");
    let mut rectangles = Vec::with_capacity(count as usize);
    for k in k0..=k1 {
        for l in l0..=l1 {
            rectangles.push(Rectangle {
                k,
                l,
                t0: k as f64 * dt,
                t1: (k + 1) as f64 * dt,
                x0: l as f64 * dx,
                x1: (l + 1) as f64 * dx,
            });
        }
    }
    Ok(AnisotropicGrid {
        n,
        time_step: dt,
        space_step: dx,
        rectangles,
    })
}

/// Orders of the capacities and Hausdorff measures in the three hitting modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub space_time: f64,
    pub fixed_time: f64,
    pub fixed_space: f64,
}

/// `(d - 2(α+1)/(α-1), d - 2/(α-1), d - 2α/(α-1))`.
pub fn dimension_thresholds(alpha: Alpha, d: usize) -> Result<Thresholds> {
    if d == 0 {
        return Err(Error::domain("d must be at least 1"));
    }
    let a = alpha.value();
    let d = d as f64;
    Ok(Thresholds {
        space_time: d - 2.0 * (a + 1.0) / (a - 1.0),
        fixed_time: d - 2.0 / (a - 1.0),
        fixed_space: d - 2.0 * a / (a - 1.0),
    })
}

/// Which branch of `K_β` the lemma's right-hand side falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `d < 2(α+1)/(α-1)`: bounded integral.
    Bounded,
    /// `d = 2(α+1)/(α-1)`: logarithmic growth.
    Logarithmic,
    /// `d > 2(α+1)/(α-1)`: power growth `a^{d - 2(α+1)/(α-1)}`.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSetup {
    pub alpha: Alpha,
    pub d: usize,
    pub p: f64,
    pub time: Window,
    pub space: Window,
    /// Upper end `N` of the admissible range of `a`.
    pub cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaPoint {
    pub a: f64,
    /// The quadruple integral.
    pub integral: f64,
    /// `a^{2(α+1)/(α-1) - d}(I₁ + I₂(a))`, the polar bound up to a constant.
    pub polar_bound: f64,
    /// `K_{d - 2(α+1)/(α-1)}(a)`.
    pub kernel: f64,
    pub ratio: f64,
}

impl LemmaSetup {
    pub fn critical_dimension(&self) -> f64 {
        let a = self.alpha.value();
        2.0 * (a + 1.0) / (a - 1.0)
    }

    pub fn regime(&self) -> Regime {
        let c = self.critical_dimension();
        let d = self.d as f64;
        if (d - c).abs() < 1e-9 * c {
            Regime::Logarithmic
        } else if d < c {
            Regime::Bounded
        } else {
            Regime::Power
        }
    }

    /// Smallest admissible `p`: the integrand must be integrable near the
    /// diagonal.
    pub fn min_p(&self) -> f64 {
        let a = self.alpha.value();
        let d = self.d as f64;
        4.0 * d * (d / 2.0 - 2.0 / (a - 1.0) - 1.0)
    }

    fn validate(&self, a: f64) -> Result<()> {
        if self.d == 0 {
            return Err(Error::domain("d must be at least 1"));
        }
        if !(self.p > 0.0) || self.p <= self.min_p() {
            return Err(Error::domain(format!(
                "p = {} is not admissible: need p > max(0, {})",
                self.p,
                self.min_p()
            )));
        }
        if !(self.cap > 0.0) || !(a > 0.0 && a <= self.cap) {
            return Err(Error::domain(format!("a = {a} must lie in (0, N] with N = {}", self.cap)));
        }
        Ok(())
    }
}

fn quad_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-9,
        max_intervals: 20_000,
    }
}

/// The quadruple integral over `I×I×J×J` of
/// `Δ^{-d} [Δ²/a² ∧ 1]^{p/(4d)}`, `Δ = |t-s|^{(α-1)/(2α)} + |x-y|^{(α-1)/2}`.
///
/// Reduced exactly to two dimensions by `ũ = |t-s|`, `ṽ = |x-y|` (weights
/// `2(|I|-ũ)·2(|J|-ṽ)`), then rescaled so `Δ = a(√u + √v)` and written in
/// coordinates `u = ρc`, `v = ρ(1-c)`. The radial integral runs in `log ρ`
/// on either side of the kink at `Δ = a`.
pub fn lemma_integral(setup: &LemmaSetup, a: f64) -> Result<f64> {
    setup.validate(a)?;
    let al = setup.alpha.value();
    let d = setup.d as f64;
    let q = setup.p / (4.0 * d);
    let (li, lj) = (setup.time.len(), setup.space.len());
    let eu = al / (al - 1.0);
    let ev = 1.0 / (al - 1.0);
    let u_max = li.powf(1.0 / eu) / (a * a);
    let v_max = lj.powf(al - 1.0) / (a * a);
    let jac = eu * ev * a.powf(2.0 * (al + 1.0) / (al - 1.0) - d);
    // ρ-power of the integrand after including the Jacobian ρ of (u,v) → (ρ,c)
    let gamma = 2.0 / (al - 1.0) - d / 2.0;
    let opts = quad_opts();

    let radial = |c: f64| -> Result<f64> {
        let sc = c.sqrt() + (1.0 - c).sqrt();
        let angular = c.powf(ev) * (1.0 - c).powf(ev - 1.0) * sc.powf(-d);
        let reach = (if c > 0.0 { u_max / c } else { f64::INFINITY }).min(if c < 1.0 {
            v_max / (1.0 - c)
        } else {
            f64::INFINITY
        });
        let kink = (1.0 / (sc * sc)).min(reach);
        let weight = |rho: f64| {
            let ut = (rho * c * a * a).powf(eu);
            let vt = (rho * (1.0 - c) * a * a).powf(ev);
            4.0 * (li - ut).max(0.0) * (lj - vt).max(0.0)
        };
        // with ρ = e^s the measure dρ becomes ρ ds
        // evaluated in logs: far below the kink ρ underflows
        let log_sc2 = 2.0 * sc.ln();
        let inner = |s: f64, power: f64| {
            let log_cut = (s + log_sc2).min(0.0);
            ((gamma + 1.0) * s + power * log_cut).exp() * weight(s.exp())
        };
        let lo_exp = gamma + q + 1.0;
        // below the kink the integrand is ρ^{γ+q+1} in s; cut where it is negligible
        let s_kink = kink.ln();
        let s_floor = s_kink - 60.0 / lo_exp;
        let near = integrate(|s| inner(s, q), s_floor, s_kink, opts)?.value;
        let far = if reach > kink {
            integrate(|s| inner(s, q), s_kink, reach.ln(), opts)?.value
        } else {
            0.0
        };
        Ok(angular * (near + far))
    };
    let mut err = None;
    let total = integrate_with_breakpoints(
        |c| match radial(c) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        &[0.0, u_max / (u_max + v_max), 1.0],
        opts,
    )?
    .value;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(jac * total)
}

/// `a^{2(α+1)/(α-1) - d}(I₁ + I₂(a))` with `K̄ = (|I|^{2(α-1)/α} + |J|^{2(α-1)})^{1/2}`:
/// the polar-coordinate majorant, closed form.
pub fn lemma_polar_bound(setup: &LemmaSetup, a: f64) -> Result<f64> {
    setup.validate(a)?;
    let al = setup.alpha.value();
    let d = setup.d as f64;
    let n = setup.cap;
    let kbar = (setup.time.len().powf(2.0 * (al - 1.0) / al) + setup.space.len().powf(2.0 * (al - 1.0))).sqrt();
    let gamma = 2.0 / (al - 1.0) - d / 2.0;
    let e1 = gamma + setup.p / (4.0 * d) + 1.0;
    let lo = kbar / (n * n);
    let hi = kbar / (a * a);
    let i1 = lo.powf(e1) / e1;
    let i2 = if (gamma + 1.0).abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(gamma + 1.0) - lo.powf(gamma + 1.0)) / (gamma + 1.0)
    };
    Ok(a.powf(setup.critical_dimension() - d) * (i1 + i2))
}

/// The integral at `a`, the polar majorant and their ratio to the kernel.
pub fn lemma_integral_check(setup: &LemmaSetup, a: f64) -> Result<LemmaPoint> {
    let integral = lemma_integral(setup, a)?;
    let polar_bound = lemma_polar_bound(setup, a)?;
    let beta = setup.d as f64 - setup.critical_dimension();
    let beta = if setup.regime() == Regime::Logarithmic { 0.0 } else { beta };
    let kernel = kernel_unchecked(beta, a);
    Ok(LemmaPoint {
        a,
        integral,
        polar_bound,
        kernel,
        ratio: integral / kernel,
    })
}

/// Run the check over `a = 10^{-1}, …, 10^{-levels}`.
pub fn lemma_ladder(setup: &LemmaSetup, levels: u32) -> Result<Vec<LemmaPoint>> {
    (1..=levels)
        .map(|k| lemma_integral_check(setup, 10f64.powi(-(k as i32))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_steps_and_count() {
        let a2 = Alpha::new(2.0).unwrap();
        assert_eq!(anisotropic_steps(a2, 1), (0.0625, 0.25));
        let unit = Window::new(0.0, 1.0).unwrap();
        let g = anisotropic_grid(a2, 2, unit, unit).unwrap();
        assert_eq!(g.rectangles.len(), 4096);
        let a = Alpha::new(1.5).unwrap();
        let g = anisotropic_grid(a, 1, Window::new(0.1, 0.3).unwrap(), Window::new(-0.2, 0.05).unwrap()).unwrap();
        for r in &g.rectangles {
            let corner = |t, x| crate::kernel::ParabolicPoint { t, x };
            let diam = crate::kernel::delta_metric(a, corner(r.t0, r.x0), corner(r.t1, r.x1));
            assert!(diam <= 2.0 * 0.5 * (1.0 + 1e-12));
            assert!(r.t1 > 0.1 && r.t0 < 0.3 && r.x1 > -0.2 && r.x0 < 0.05);
        }
        assert!(anisotropic_grid(a2, 0, unit, unit).is_err());
    }

    #[test]
    fn thresholds() {
        let t = dimension_thresholds(Alpha::new(2.0).unwrap(), 1).unwrap();
        assert_eq!((t.space_time, t.fixed_time, t.fixed_space), (-5.0, -1.0, -3.0));
        let t = dimension_thresholds(Alpha::new(1.5).unwrap(), 10).unwrap();
        assert!((t.space_time).abs() < 1e-12 && (t.fixed_time - 6.0).abs() < 1e-12 && (t.fixed_space - 4.0).abs() < 1e-12);
    }

    fn setup(d: usize, p: f64) -> LemmaSetup {
        LemmaSetup {
            alpha: Alpha::new(2.0).unwrap(),
            d,
            p,
            time: Window::new(0.5, 1.0).unwrap(),
            space: Window::new(-0.5, 0.5).unwrap(),
            cap: 1.0,
        }
    }

    #[test]
    fn admissibility() {
        let s = setup(7, 14.0);
        assert!(lemma_integral(&s, 0.1).is_err());
        assert!(lemma_integral(&setup(7, 15.0), 0.1).is_ok());
        assert!(lemma_integral(&setup(5, 1.0), 2.0).is_err());
        assert_eq!(setup(6, 8.0).regime(), Regime::Logarithmic);
    }

    #[test]
    fn large_a_reduces_to_power_integral() {
        // with a at least the largest Δ the cut factor is Δ^{p/2}/a^{p/2} everywhere;
        // for d = 1, p = 2, α = 2 and I = J = [0,1] the integrand is a^{-1}
        // (|t-s|^{1/4} + |x-y|^{1/2})^{0} = 1/a, so the integral is 1/a
        let s = LemmaSetup {
            alpha: Alpha::new(2.0).unwrap(),
            d: 1,
            p: 2.0,
            time: Window::new(0.0, 1.0).unwrap(),
            space: Window::new(0.0, 1.0).unwrap(),
            cap: 10.0,
        };
        let v = lemma_integral(&s, 4.0).unwrap();
        assert!((v - 0.25).abs() < 1e-7, "{v}");
    }
}
