use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shipped coefficient presets `(σ, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    /// `σ ≡ Id`, `b ≡ 0`: the Gaussian reference field.
    Additive,
    /// `σ_ii(u) = 1 + tanh(u_i)/2`, `b_i(u) = -tanh(u_i)/2`; diagonal,
    /// uniformly elliptic with `ρ = 1/2`.
    BoundedSmooth,
    /// `σ ≡ 0`, `b ≡ drift` componentwise.
    DriftOnly { drift: f64 },
}

impl Preset {
    pub fn name(&self) -> String {
        match self {
            Preset::Additive => "additive".into(),
            Preset::BoundedSmooth => "bounded-smooth".into(),
            Preset::DriftOnly { drift } => format!("drift-only({drift})"),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "additive" => Ok(Preset::Additive),
            "bounded-smooth" => Ok(Preset::BoundedSmooth),
            _ => {
                if let Some(v) = name.strip_prefix("drift-only(").and_then(|r| r.strip_suffix(')')) {
                    let drift = v
                        .parse::<f64>()
                        .map_err(|_| Error::domain(format!("bad drift in preset name {name:?}")))?;
                    Ok(Preset::DriftOnly { drift })
                } else {
                    Err(Error::domain(format!("unknown coefficient preset {name:?}")))
                }
            }
        }
    }
}

/// A preset bound to a dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub preset: Preset,
    pub d: usize,
}

impl CoefficientSet {
    pub fn new(preset: Preset, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension d must be at least 1"));
        }
        if let Preset::DriftOnly { drift } = preset {
            if !drift.is_finite() {
                return Err(Error::domain("drift must be finite"));
            }
        }
        Ok(CoefficientSet { preset, d })
    }

    pub fn name(&self) -> String {
        self.preset.name()
    }

    /// True when σ is diagonal, so `σ(u)ξ` is computed componentwise.
    pub fn is_diagonal(&self) -> bool {
        true
    }

    /// Diagonal of `σ(u)`.
    pub fn sigma_diag(&self, u: &[f64], out: &mut [f64]) {
        match self.preset {
            Preset::Additive => out.fill(1.0),
            Preset::BoundedSmooth => {
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = 1.0 + 0.5 * x.tanh();
                }
            }
            Preset::DriftOnly { .. } => out.fill(0.0),
        }
    }

    /// Full `σ(u)` in row-major `d × d` layout.
    pub fn sigma(&self, u: &[f64], out: &mut [f64]) {
        let d = self.d;
        out.fill(0.0);
        let mut diag = vec![0.0; d];
        self.sigma_diag(u, &mut diag);
        for i in 0..d {
            out[i * d + i] = diag[i];
        }
    }

    pub fn drift(&self, u: &[f64], out: &mut [f64]) {
        match self.preset {
            Preset::Additive => out.fill(0.0),
            Preset::BoundedSmooth => {
                for (o, &x) in out.iter_mut().zip(u) {
                    *o = -0.5 * x.tanh();
                }
            }
            Preset::DriftOnly { drift } => out.fill(drift),
        }
    }

    /// True when `b ≡ 0` and `σ` is constant.
    pub fn is_additive(&self) -> bool {
        matches!(self.preset, Preset::Additive)
    }

    /// Declared Lipschitz constant of `σ` and `b` (per entry, sup norm).
    pub fn lipschitz_bound(&self) -> f64 {
        match self.preset {
            Preset::Additive | Preset::DriftOnly { .. } => 0.0,
            Preset::BoundedSmooth => 0.5,
        }
    }

    /// Lower bound `ρ` with `‖σ(u)ξ‖ ≥ ρ‖ξ‖`.
    pub fn ellipticity(&self) -> f64 {
        match self.preset {
            Preset::Additive => 1.0,
            Preset::BoundedSmooth => 0.5,
            Preset::DriftOnly { .. } => 0.0,
        }
    }
}
