//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The integrator keeps every subinterval in a max-heap keyed by its error
//! estimate and bisects the worst one until the summed error estimate meets
//! `max(abs_tol, rel_tol * |I|)`. Initial breakpoints can be supplied, which
//! is how oscillatory integrands are handed over (one panel per half period).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

impl QuadOptions {
    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [0.0f64; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breakpoints(f, &[a, b], opts)
}

/// Integrate `f` over `[points[0], points[last]]`, starting from the given
/// partition. `points` must be non-decreasing.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::domain("quadrature needs at least two breakpoints"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("quadrature breakpoints must be finite"));
    }
    let lower = points[0];
    let upper = points[points.len() - 1];
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] < w[0] {
            return Err(Error::domain("quadrature breakpoints must be non-decreasing"));
        }
        if w[1] > w[0] {
            heap.push(gauss_kronrod(&mut f, w[0], w[1]));
            evaluations += 15;
        }
    }
    let total = |heap: &BinaryHeap<Panel>| -> (f64, f64) {
        heap.iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = total(&heap);
    let limit = opts.max_intervals.max(heap.len() + 1);
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            break;
        }
        if heap.len() >= limit {
            return Err(Error::Quadrature {
                lower,
                upper,
                achieved: error,
                requested: target,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            heap.push(worst);
            let (v, e) = total(&heap);
            let target = opts.abs_tol.max(opts.rel_tol * v.abs());
            if e <= 10.0 * target {
                break;
            }
            return Err(Error::Quadrature {
                lower,
                upper,
                achieved: e,
                requested: target,
            });
        }
        let left = gauss_kronrod(&mut f, worst.a, mid);
        let right = gauss_kronrod(&mut f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Periodically resum to stop drift from incremental updates.
        if heap.len() % 256 == 0 {
            let (v, e) = total(&heap);
            value = v;
            error = e;
        }
    }
    let (v, e) = total(&heap);
    if !v.is_finite() {
        return Err(Error::Quadrature {
            lower,
            upper,
            achieved: f64::INFINITY,
            requested: opts.abs_tol,
        });
    }
    Ok(QuadResult {
        value: v,
        abs_error: e,
        evaluations,
    })
}

/// Integrate over `[a, b]` where the integrand has an integrable power-law
/// singularity at `a`. Uses the substitution `x = a + (b - a) w^m`.
pub fn integrate_endpoint_singular<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    power: f64,
    opts: QuadOptions,
) -> Result<QuadResult> {
    let m = power.max(1.0);
    let len = b - a;
    integrate(
        |w| {
            if w <= 0.0 {
                return 0.0;
            }
            let x = a + len * w.powf(m);
            f(x) * len * m * w.powf(m - 1.0)
        },
        0.0,
        1.0,
        opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(
            |x: f64| (-x * x).exp(),
            -10.0,
            10.0,
            QuadOptions::default(),
        )
        .unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_with_breakpoints() {
        // ∫_0^{20π} cos(x) e^{-x/10} dx = (1/10)(1 - e^{-2π}) / (1 + 1/100)
        let pts: Vec<f64> = (0..=20).map(|k| k as f64 * std::f64::consts::PI).collect();
        let r = integrate_with_breakpoints(|x: f64| x.cos() * (-x / 10.0).exp(), &pts, QuadOptions::default()).unwrap();
        let expected = 0.1 * (1.0 - (-2.0 * std::f64::consts::PI).exp()) / 1.01;
        assert!((r.value - expected).abs() < 1e-12, "{} vs {}", r.value, expected);
    }

    #[test]
    fn singular_endpoint() {
        // ∫_0^1 x^{-0.8} dx = 5
        let r = integrate_endpoint_singular(|x: f64| x.powf(-0.8), 0.0, 1.0, 5.0, QuadOptions::default()).unwrap();
        assert!((r.value - 5.0).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn reports_failure_when_capped() {
        let opts = QuadOptions {
            abs_tol: 0.0,
            rel_tol: 1e-15,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
