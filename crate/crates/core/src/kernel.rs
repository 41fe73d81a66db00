//! The fractional heat kernel `G_α(t, x)` and the closed-form identities and
//! integrals built on it.
//!
//! `G_α(t, ·)` is the symmetric α-stable density with characteristic
//! function `exp(-t|λ|^α)`. Point values come from the even cosine transform
//! `(1/π) ∫_0^Λ cos(λx) e^{-tλ^α} dλ` with `Λ` chosen so that
//! `e^{-tΛ^α} < 1e-17`. Far in the tail (`|x| t^{-1/α} ≥ 25`) the convergent
//! asymptotic expansion of the stable density is used instead, which is both
//! cheaper and more accurate than integrating hundreds of oscillations.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

/// Stability index of the fractional Laplacian, `1 < α ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 1.0 && value <= 2.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::domain(format!("alpha must lie in (1, 2], got {value}")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `α = 2`, the classical heat equation.
    #[inline]
    pub fn is_gaussian(self) -> bool {
        self.0 == 2.0
    }

    /// Temporal Hölder exponent of the squared increment, `(α-1)/α`.
    #[inline]
    pub fn time_exponent(self) -> f64 {
        (self.0 - 1.0) / self.0
    }

    /// Spatial exponent of the squared increment, `α - 1`.
    #[inline]
    pub fn space_exponent(self) -> f64 {
        self.0 - 1.0
    }

    fn cache_key(self) -> u64 {
        self.0.to_bits()
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A space-time point `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParabolicPoint {
    pub t: f64,
    pub x: f64,
}

impl ParabolicPoint {
    pub fn new(t: f64, x: f64) -> Result<Self> {
        if !t.is_finite() || !x.is_finite() || t < 0.0 {
            return Err(Error::domain(format!("invalid space-time point ({t}, {x})")));
        }
        Ok(ParabolicPoint { t, x })
    }
}

/// Scaled distance beyond which the asymptotic tail expansion is used.
const ASYMPTOTIC_START: f64 = 25.0;
/// `e^{-CUTOFF_EXPONENT} < 1e-17` sets the frequency cutoff.
const CUTOFF_EXPONENT: f64 = 40.0;

fn kernel_quad_options(t: f64, alpha: f64) -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-16 * t.powf(-1.0 / alpha),
        rel_tol: 1e-13,
        max_intervals: 200_000,
    }
}

/// Frequency breakpoints for `∫_0^Λ cos(λx) e^{-tλ^α} dλ`: one panel per half
/// period of the cosine, with the decay scale `t^{-1/α}` resolved as well.
fn fourier_breakpoints(t: f64, x: f64, alpha: f64) -> Result<Vec<f64>> {
    let cutoff = (CUTOFF_EXPONENT / t).powf(1.0 / alpha);
    let scale = t.powf(-1.0 / alpha);
    let mut pts = vec![0.0];
    let ax = x.abs();
    if ax * cutoff > PI {
        let step = PI / ax;
        let panels = (cutoff / step).ceil() as usize;
        if panels > 2_000_000 {
            return Err(Error::domain(format!(
                "kernel argument too oscillatory for quadrature (x = {x}, t = {t})"
            )));
        }
        for k in 1..panels {
            pts.push(k as f64 * step);
        }
    } else {
        for f in [0.25, 1.0, 2.0] {
            if f * scale < cutoff {
                pts.push(f * scale);
            }
        }
    }
    pts.push(cutoff);
    Ok(pts)
}

/// `G_α(t, x)` by cosine-transform quadrature of the Fourier integral, for
/// every α including 2. Used directly for moderate arguments and as the
/// reference path in tests.
pub fn green_kernel_quadrature(alpha: Alpha, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("kernel time must be positive, got {t}")));
    }
    if !x.is_finite() {
        return Err(Error::domain("kernel position must be finite"));
    }
    let a = alpha.value();
    let pts = fourier_breakpoints(t, x, a)?;
    let r = quad::integrate_with_breakpoints(
        |lam: f64| (lam * x).cos() * (-t * lam.powf(a)).exp(),
        &pts,
        kernel_quad_options(t, a),
    )?;
    Ok((r.value / PI).max(0.0))
}

/// Large-|y| expansion of `G_α(1, y)` for `α < 2`:
/// `(1/π) Σ_k (-1)^{k+1} Γ(αk+1)/k! sin(kπα/2) |y|^{-(αk+1)}`.
pub(crate) fn stable_tail_series(alpha: f64, y: f64) -> f64 {
    let y = y.abs();
    let ly = y.ln();
    let mut sum = 0.0;
    let mut prev_mag = f64::INFINITY;
    for k in 1..=400u32 {
        let kf = k as f64;
        let log_mag = ln_gamma(alpha * kf + 1.0) - ln_gamma(kf + 1.0) - (alpha * kf + 1.0) * ly;
        let mag = log_mag.exp();
        if mag > prev_mag {
            break;
        }
        prev_mag = mag;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * mag * (kf * PI * alpha / 2.0).sin();
        sum += term;
        if mag < 1e-18 * sum.abs() {
            break;
        }
    }
    (sum / PI).max(0.0)
}

/// The fractional heat kernel `G_α(t, x)` for `t > 0`.
pub fn green_kernel(alpha: Alpha, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("kernel time must be positive, got {t}")));
    }
    if !x.is_finite() {
        return Err(Error::domain("kernel position must be finite"));
    }
    if alpha.is_gaussian() {
        return Ok((4.0 * PI * t).powf(-0.5) * (-x * x / (4.0 * t)).exp());
    }
    let a = alpha.value();
    let scale = t.powf(-1.0 / a);
    let y = x * scale;
    if y.abs() >= ASYMPTOTIC_START {
        return Ok(scale * stable_tail_series(a, y));
    }
    green_kernel_quadrature(alpha, t, x)
}

/// Fourier-quadrature path even for `α = 2`; the large-|y| series is still
/// used for `α < 2` where it is the more accurate route.
fn green_kernel_numeric(alpha: Alpha, t: f64, x: f64) -> Result<f64> {
    let a = alpha.value();
    if !alpha.is_gaussian() && (x * t.powf(-1.0 / a)).abs() >= ASYMPTOTIC_START {
        return green_kernel(alpha, t, x);
    }
    green_kernel_quadrature(alpha, t, x)
}

fn memo(table: &'static OnceLock<Mutex<HashMap<u64, f64>>>, alpha: Alpha, compute: impl FnOnce() -> Result<f64>) -> Result<f64> {
    let map = table.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("kernel cache poisoned").get(&alpha.cache_key()) {
        return Ok(*v);
    }
    let v = compute()?;
    map.lock()
        .expect("kernel cache poisoned")
        .insert(alpha.cache_key(), v);
    Ok(v)
}

static ORIGIN: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
static TAIL: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();

/// `G_α(1, 0)` by quadrature, cached per α.
pub fn kernel_at_origin(alpha: Alpha) -> Result<f64> {
    memo(&ORIGIN, alpha, || {
        let a = alpha.value();
        let cutoff = (CUTOFF_EXPONENT).powf(1.0 / a);
        let r = quad::integrate_with_breakpoints(
            |lam: f64| (-lam.powf(a)).exp(),
            &[0.0, 0.5, 1.0, 2.0, cutoff],
            QuadOptions::with_tolerances(1e-16, 1e-14),
        )?;
        Ok(r.value / PI)
    })
}

/// `c_α = 2^{-1/α} G_α(1,0) α/(α-1)`, the constant in
/// `∫_a^b ∫ G_α²(t-r, x-v) dv dr = c_α((t-a)^{(α-1)/α} - (t-b)^{(α-1)/α})`.
pub fn squared_mass_constant(alpha: Alpha) -> Result<f64> {
    let a = alpha.value();
    Ok(2f64.powf(-1.0 / a) * kernel_at_origin(alpha)? * a / (a - 1.0))
}

/// `Var v(t, x) = c_α t^{(α-1)/α}` for the additive-noise solution.
pub fn additive_variance(alpha: Alpha, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("time must be non-negative"));
    }
    Ok(squared_mass_constant(alpha)? * t.powf(alpha.time_exponent()))
}

/// `∫_a^b ∫_ℝ G_α²(t - r, x - v) dv dr` by quadrature in `r`, with the space
/// integral reduced to `G_α(2(t - r), 0)` by the semigroup property.
pub fn squared_mass_integral(alpha: Alpha, a: f64, b: f64, t: f64) -> Result<f64> {
    if !(0.0 <= a && a <= b && b <= t) || !t.is_finite() {
        return Err(Error::domain(format!(
            "need 0 <= a <= b <= t, got a = {a}, b = {b}, t = {t}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let lo = t - b;
    let hi = t - a;
    let al = alpha.value();
    let opts = QuadOptions::with_tolerances(1e-15, 1e-11);
    let f = |tau: f64| green_kernel_numeric(alpha, 2.0 * tau, 0.0).unwrap_or(f64::NAN);
    let r = if lo == 0.0 {
        quad::integrate_endpoint_singular(f, 0.0, hi, al / (al - 1.0), opts)?
    } else {
        quad::integrate(f, lo, hi, opts)?
    };
    Ok(r.value)
}

/// The fractional parabolic metric
/// `Δ_α = |t - s|^{(α-1)/(2α)} + |x - y|^{(α-1)/2}`.
pub fn delta_metric(alpha: Alpha, p1: ParabolicPoint, p2: ParabolicPoint) -> f64 {
    let a = alpha.value();
    (p1.t - p2.t).abs().powf((a - 1.0) / (2.0 * a)) + (p1.x - p2.x).abs().powf((a - 1.0) / 2.0)
}

/// `∫_0^∞ (1 - cos u) u^{-α} du`.
fn one_minus_cos_moment(alpha: f64) -> f64 {
    if alpha == 2.0 {
        PI / 2.0
    } else {
        gamma(2.0 - alpha) * (PI * alpha / 2.0).sin() / (alpha - 1.0)
    }
}

fn ordered(p_t: ParabolicPoint, p_s: ParabolicPoint) -> Result<()> {
    if !(p_s.t >= 0.0) || p_s.t > p_t.t || !p_t.t.is_finite() {
        return Err(Error::domain(format!(
            "need 0 <= s <= t, got s = {}, t = {}",
            p_s.t, p_t.t
        )));
    }
    Ok(())
}

/// `E|v(t,x) - v(s,y)|²` for the additive-noise solution, computed through
/// Plancherel: `I₁ = c_α (t-s)^{(α-1)/α}` plus
/// `I₂ = (1/2π) ∫ (1 - e^{-2s|λ|^α})/(2|λ|^α) |1 - e^{-(t-s)|λ|^α} e^{iλ(x-y)}|² dλ`.
pub fn increment_variance_exact(alpha: Alpha, p_t: ParabolicPoint, p_s: ParabolicPoint) -> Result<f64> {
    ordered(p_t, p_s)?;
    let a = alpha.value();
    let s = p_s.t;
    let tau = p_t.t - s;
    let h = (p_t.x - p_s.x).abs();
    let i1 = squared_mass_constant(alpha)? * tau.powf(alpha.time_exponent());
    if s == 0.0 || (tau == 0.0 && h == 0.0) {
        return Ok(i1);
    }
    let opts = QuadOptions {
        abs_tol: 1e-15,
        rel_tol: 1e-12,
        max_intervals: 400_000,
    };
    // W(λ) = (1 - e^{-2sλ^α}) / (2λ^α), with the λ → 0 limit s.
    let weight = move |lam: f64| -> f64 {
        let la = lam.powf(a);
        if la < 1e-300 {
            s
        } else {
            -(-2.0 * s * la).exp_m1() / (2.0 * la)
        }
    };
    let geometric_points = |from: f64, to: f64| -> Vec<f64> {
        let mut pts = vec![0.0];
        let mut x = from;
        while x < to {
            pts.push(x);
            x *= 4.0;
        }
        pts.push(to);
        pts
    };

    // Term A: ∫ W (1 - q)², q = e^{-τλ^α}; beyond the cutoff the integrand is 1/(2λ^α).
    let mut term_a = 0.0;
    if tau > 0.0 {
        let rate = (2.0 * s).min(tau);
        let cutoff = (CUTOFF_EXPONENT / rate).powf(1.0 / a);
        let start = (1e-3 / (2.0 * s).max(tau)).powf(1.0 / a).min(cutoff / 2.0);
        let pts = geometric_points(start, cutoff);
        let r = quad::integrate_with_breakpoints(
            |lam: f64| {
                let one_minus_q = -(-tau * lam.powf(a)).exp_m1();
                weight(lam) * one_minus_q * one_minus_q
            },
            &pts,
            opts,
        )?;
        term_a = r.value + cutoff.powf(1.0 - a) / (2.0 * (a - 1.0));
    }

    // Term B: 2 ∫ W q (1 - cos λh).
    let mut term_b = 0.0;
    if h > 0.0 {
        if tau > 0.0 {
            let cutoff = (CUTOFF_EXPONENT / tau).powf(1.0 / a);
            let pts = oscillation_points(h, cutoff)?;
            let r = quad::integrate_with_breakpoints(
                |lam: f64| {
                    let q = (-tau * lam.powf(a)).exp();
                    let sn = (0.5 * lam * h).sin();
                    4.0 * weight(lam) * q * sn * sn
                },
                &pts,
                opts,
            )?;
            term_b = r.value;
        } else {
            // q ≡ 1: split W = 1/(2λ^α) - e^{-2sλ^α}/(2λ^α); the first part is
            // h^{α-1} ∫ (1 - cos u) u^{-α} du in closed form.
            let cutoff = (CUTOFF_EXPONENT / (2.0 * s)).powf(1.0 / a);
            let pts = oscillation_points(h, cutoff)?;
            let r = quad::integrate_with_breakpoints(
                |lam: f64| {
                    let sn = (0.5 * lam * h).sin();
                    let c = 2.0 * sn * sn;
                    if lam == 0.0 {
                        0.0
                    } else {
                        (-2.0 * s * lam.powf(a)).exp() * c / lam.powf(a)
                    }
                },
                &pts,
                opts,
            )?;
            term_b = h.powf(a - 1.0) * one_minus_cos_moment(a) - r.value;
        }
    }
    Ok(i1 + (term_a + term_b) / PI)
}

fn oscillation_points(h: f64, cutoff: f64) -> Result<Vec<f64>> {
    let step = PI / h;
    let panels = (cutoff / step).ceil();
    if panels > 2.0e6 {
        return Err(Error::domain(format!(
            "increment integral too oscillatory (h = {h}, cutoff = {cutoff})"
        )));
    }
    let mut pts: Vec<f64> = (0..panels as usize).map(|k| k as f64 * step).collect();
    if pts.last().copied().unwrap_or(0.0) < cutoff {
        pts.push(cutoff);
    }
    if pts.len() < 2 {
        pts = vec![0.0, cutoff];
    }
    Ok(pts)
}

/// `Cov(v(t,x), v(s,y)) = ½ ∫_{|t-s|}^{t+s} G_α(u, x - y) du` for the
/// additive-noise solution.
pub fn additive_covariance(alpha: Alpha, p1: ParabolicPoint, p2: ParabolicPoint) -> Result<f64> {
    let (s, t) = if p1.t <= p2.t { (p1.t, p2.t) } else { (p2.t, p1.t) };
    if !(s >= 0.0) {
        return Err(Error::domain("times must be non-negative"));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let h = (p1.x - p2.x).abs();
    Ok(0.5 * kernel_time_integral(alpha, t - s, t + s, h)?)
}

/// `∫_lo^hi G_α(u, h) du`.
fn kernel_time_integral(alpha: Alpha, lo: f64, hi: f64, h: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let a = alpha.value();
    // u = w^q flattens the u^{-1/α} singularity at u = 0 when h = 0.
    let q = a / (a - 1.0);
    let wlo = lo.powf(1.0 / q);
    let whi = hi.powf(1.0 / q);
    let mut pts = vec![wlo];
    if h > 0.0 {
        // resolve the bump of G(·, h) near u ~ h^α
        let peak = h.powf(a).powf(1.0 / q);
        for f in [0.25, 1.0, 4.0] {
            let p = peak * f;
            if p > wlo && p < whi {
                pts.push(p);
            }
        }
    }
    pts.push(whi);
    let r = quad::integrate_with_breakpoints(
        |w: f64| {
            if w <= 0.0 {
                return if h == 0.0 {
                    q * kernel_at_origin(alpha).unwrap_or(f64::NAN)
                } else {
                    0.0
                };
            }
            let u = w.powf(q);
            green_kernel(alpha, u, h).unwrap_or(f64::NAN) * q * w.powf(q - 1.0)
        },
        &pts,
        QuadOptions::with_tolerances(1e-15, 1e-12),
    )?;
    Ok(r.value)
}

/// `∫_0^T ∫_ℝ g_α(r, v)² dv dr` for
/// `g_α(r, v) = 1_{r<t} G_α(t - r, x - v) - 1_{r<s} G_α(s - r, y - v)`.
///
/// Computed as `Var(t) + Var(s) - 2 Cov`, with the covariance reduced by the
/// semigroup property to a time integral of the kernel. This is the
/// kernel-space route; [`increment_variance_exact`] is the Fourier-space one.
pub fn g_diff_sq_integral(alpha: Alpha, p_t: ParabolicPoint, p_s: ParabolicPoint) -> Result<f64> {
    ordered(p_t, p_s)?;
    if p_t == p_s {
        return Ok(0.0);
    }
    let c = squared_mass_constant(alpha)?;
    let th = alpha.time_exponent();
    let (t, s) = (p_t.t, p_s.t);
    let h = (p_t.x - p_s.x).abs();
    let cross = kernel_time_integral(alpha, t - s, t + s, h)?;
    Ok((c * (t.powf(th) + s.powf(th)) - cross).max(0.0))
}

/// `ζ(x) = (x+1)^{(α-1)/α} - x^{(α-1)/α} + (x ∧ 1)^{(α-1)/α}`.
pub fn zeta(alpha: Alpha, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("zeta needs x >= 0, got {x}")));
    }
    let th = alpha.time_exponent();
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok((x + 1.0).powf(th) - x.powf(th) + x.min(1.0).powf(th))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZetaMinimum {
    pub argmin: f64,
    pub value: f64,
    /// Minimum over the search interval, before comparing with the limit at ∞.
    pub interval_value: f64,
}

const ZETA_SEARCH_END: f64 = 100.0;

/// Global minimum of ζ over `[0, ∞)`.
///
/// ζ is not unimodal on `[0, 100]` (it rises on `[0, 1]` and decays towards
/// its limit afterwards), so a coarse scan brackets the best cell before the
/// golden-section refinement. The value at infinity is the analytic limit 1.
pub fn zeta_min(alpha: Alpha) -> Result<ZetaMinimum> {
    let n = 2000usize;
    let step = ZETA_SEARCH_END / n as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = zeta(alpha, i as f64 * step)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let lo = (best.0.saturating_sub(1)) as f64 * step;
    let hi = ((best.0 + 1).min(n)) as f64 * step;
    let (argmin, value) = golden_section(|x| zeta(alpha, x).unwrap_or(f64::INFINITY), lo, hi, 1e-10);
    // the bracket endpoints are candidates too (minimum may sit on the boundary)
    let mut cand = [(argmin, value), (lo, zeta(alpha, lo)?), (hi, zeta(alpha, hi)?)];
    cand.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (argmin, interval_value) = cand[0];
    if interval_value <= 1.0 {
        Ok(ZetaMinimum {
            argmin,
            value: interval_value,
            interval_value,
        })
    } else {
        Ok(ZetaMinimum {
            argmin: f64::INFINITY,
            value: 1.0,
            interval_value,
        })
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `Ψ_{a,ν}(ρ) = ∫_0^a dx / (ρ + x^ν)`.
pub fn psi(a: f64, nu: f64, rho: f64) -> Result<f64> {
    if !(a > 0.0 && nu > 0.0 && rho > 0.0) {
        return Err(Error::domain(format!(
            "psi needs positive arguments, got a = {a}, nu = {nu}, rho = {rho}"
        )));
    }
    // the integrand changes scale where x^ν ≈ ρ
    let knee = rho.powf(1.0 / nu);
    let mut pts = vec![0.0];
    for f in [0.1, 1.0, 10.0] {
        let p = knee * f;
        if p > 0.0 && p < a {
            pts.push(p);
        }
    }
    pts.push(a);
    let r = quad::integrate_with_breakpoints(
        |x: f64| 1.0 / (rho + x.powf(nu)),
        &pts,
        QuadOptions::with_tolerances(1e-15, 1e-12),
    )?;
    Ok(r.value)
}

/// Smallest constant `K` with `G_α(1, x) ≤ K / (1 + |x|^{1+α})`, fitted on a
/// dense grid and against the tail limit `Γ(1+α) sin(πα/2)/π`, then padded
/// by 0.1%. Cached per α.
pub fn tail_constant(alpha: Alpha) -> Result<f64> {
    memo(&TAIL, alpha, || {
        let a = alpha.value();
        let mut best: f64 = 0.0;
        let mut x = 0.0;
        while x <= 60.0 {
            let g = green_kernel(alpha, 1.0, x)?;
            best = best.max(g * (1.0 + x.powf(1.0 + a)));
            x += 0.01;
        }
        let mut x = 60.0;
        while x <= 1e6 {
            let g = green_kernel(alpha, 1.0, x)?;
            best = best.max(g * (1.0 + x.powf(1.0 + a)));
            x *= 1.05;
        }
        if !alpha.is_gaussian() {
            best = best.max(gamma(1.0 + a) * (PI * a / 2.0).sin() / PI);
        }
        Ok(best * 1.001)
    })
}

/// Mass of `G_α(t, ·)` outside `[-L, L]` is at most `2 K_α t / (α L^α)`.
/// For `α = 2` the exact Gaussian tail `erfc(L / 2√t)` is returned instead.
pub fn tail_mass_bound(alpha: Alpha, t: f64, half_width: f64) -> Result<f64> {
    if alpha.is_gaussian() {
        return Ok(erfc(half_width / (2.0 * t.sqrt())));
    }
    let a = alpha.value();
    Ok(2.0 * tail_constant(alpha)? * t / (a * half_width.powf(a)))
}

/// Uniform samples of `G_α(1, ·)` on `[-L, L]`.
#[derive(Debug, Clone, Serialize)]
pub struct KernelProfile {
    pub alpha: Alpha,
    pub half_width: f64,
    pub values: Vec<f64>,
}

impl KernelProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.values.len() - 1) as f64
    }

    pub fn position(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn trapezoid_mass(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        self.spacing() * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// Upper bound on `1 - ∫_{-L}^{L} G_α(1, x) dx`.
    pub fn tail_bound(&self) -> Result<f64> {
        tail_mass_bound(self.alpha, 1.0, self.half_width)
    }

    /// Largest `|values[j] - values[n-1-j]|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|j| (self.values[j] - self.values[n - 1 - j]).abs())
            .fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(j, _)| j)
            .unwrap_or(0)
    }
}

/// Tabulate `G_α(1, ·)` at `n` equally spaced nodes on `[-L, L]`.
pub fn kernel_profile(alpha: Alpha, half_width: f64, n: usize) -> Result<KernelProfile> {
    use rayon::prelude::*;
    if !(half_width > 0.0) || !half_width.is_finite() {
        return Err(Error::domain("profile half-width must be positive"));
    }
    if n < 16 {
        return Err(Error::domain(format!("profile needs at least 16 nodes, got {n}")));
    }
    let dx = 2.0 * half_width / (n - 1) as f64;
    let values = (0..n)
        .into_par_iter()
        .map(|j| {
            // mirror so the table is exactly symmetric
            let jj = j.min(n - 1 - j);
            green_kernel(alpha, 1.0, -half_width + jj as f64 * dx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelProfile {
        alpha,
        half_width,
        values,
    })
}

/// `∫_ℝ f(y) dy` for integrands with algebraic tails, using
/// `y = c ± u/(1-u)` on each half line.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, center: f64, breakpoints: &[f64], opts: QuadOptions) -> Result<f64> {
    let map = |u: f64, sign: f64| -> f64 {
        if u >= 1.0 {
            return 0.0;
        }
        let y = center + sign * u / (1.0 - u);
        f(y) / ((1.0 - u) * (1.0 - u))
    };
    // breakpoints in y mapped to u = d/(1+d)
    let mut right = vec![0.0];
    let mut left = vec![0.0];
    for &b in breakpoints {
        let d = b - center;
        let u = d.abs() / (1.0 + d.abs());
        if d > 0.0 {
            right.push(u);
        } else if d < 0.0 {
            left.push(u);
        }
    }
    for v in [&mut right, &mut left] {
        v.push(1.0);
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
    }
    let r = quad::integrate_with_breakpoints(|u| map(u, 1.0), &right, opts)?;
    let l = quad::integrate_with_breakpoints(|u| map(u, -1.0), &left, opts)?;
    Ok(r.value + l.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(v: f64) -> Alpha {
        Alpha::new(v).unwrap()
    }

    #[test]
    fn alpha_domain() {
        assert!(Alpha::new(1.0).is_err());
        assert!(Alpha::new(2.5).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(2.0).is_ok());
        let parsed: std::result::Result<Alpha, _> = serde_json::from_str("2.5");
        assert!(parsed.is_err());
    }

    #[test]
    fn gaussian_origin_value() {
        let g = green_kernel(al(2.0), 1.0, 0.0).unwrap();
        assert!((g - (4.0 * PI).powf(-0.5)).abs() < 1e-15);
        assert!((g - 0.28209).abs() < 1e-5);
    }

    #[test]
    fn rejects_non_positive_time() {
        assert!(matches!(green_kernel(al(1.5), 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(green_kernel(al(1.5), -1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn tail_series_matches_quadrature_at_crossover() {
        for a in [1.1, 1.2, 1.5, 1.8, 1.95] {
            for y in [25.0, 31.0, 40.0] {
                let s = stable_tail_series(a, y);
                let q = green_kernel_quadrature(al(a), 1.0, y).unwrap();
                assert!((s - q).abs() <= 1e-9 * q + 1e-17, "alpha {a} y {y}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn delta_metric_examples() {
        let p = |t, x| ParabolicPoint { t, x };
        assert_eq!(delta_metric(al(2.0), p(16.0, 4.0), p(0.0, 0.0)), 4.0);
        assert_eq!(delta_metric(al(1.5), p(1.0, 1.0), p(1.0, 1.0)), 0.0);
        assert!((delta_metric(al(1.5), p(2.0, 1.0), p(1.0, 0.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn squared_mass_ordering() {
        assert!(squared_mass_integral(al(1.5), 0.5, 0.2, 1.0).is_err());
        assert!(squared_mass_integral(al(1.5), 0.2, 1.2, 1.0).is_err());
        assert_eq!(squared_mass_integral(al(1.5), 0.3, 0.3, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta(al(2.0), 0.0).unwrap(), 1.0);
        assert!((zeta(al(1.5), 1e9).unwrap() - 1.0).abs() < 1e-3);
        assert!(zeta(al(1.5), -1.0).is_err());
    }

    #[test]
    fn psi_examples() {
        assert!((psi(1.0, 1.0, 1.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((psi(1.0, 2.0, 1.0).unwrap() - PI / 4.0).abs() < 1e-12);
        assert!(psi(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn increment_variance_trivial_cases() {
        let p = ParabolicPoint { t: 0.7, x: 0.1 };
        assert_eq!(increment_variance_exact(al(1.5), p, p).unwrap(), 0.0);
        assert_eq!(g_diff_sq_integral(al(1.5), p, p).unwrap(), 0.0);
        let q = ParabolicPoint { t: 0.9, x: 0.1 };
        assert!(increment_variance_exact(al(1.5), p, q).is_err());
    }

    #[test]
    fn profile_preconditions() {
        assert!(kernel_profile(al(1.5), 10.0, 8).is_err());
        assert!(kernel_profile(al(1.5), 0.0, 64).is_err());
    }
}
