//! Explicit formulas: heat and Mehler kernels, the quadratic-potential
//! action and its geodesics, rate pairs `(A, β)` and the drift transform.
//!
//! Hyperbolic functions are evaluated through [`ln_sinh`] so that large
//! arguments (above 30) stay finite.

mod providers;
mod rate;

pub use providers::{HeatOmega, QuadraticOmega};
pub use rate::RatePair;

use crate::action::TimeWindow;
use crate::expr::{add, derivative, mul, sub, ExprError, PotentialExpr};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("C₁ must be nonzero")]
    ZeroFrequency,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

const LOG_SPACE_THRESHOLD: f64 = 30.0;

/// `ln sinh(z)` for `z > 0`, stable for large `z`.
pub fn ln_sinh(z: f64) -> f64 {
    if z > LOG_SPACE_THRESHOLD {
        z - LN_2 + (-(-2.0 * z).exp()).ln_1p()
    } else {
        z.sinh().ln()
    }
}

/// `1/sinh(z)` for `z > 0` without overflow.
pub(crate) fn csch(z: f64) -> f64 {
    if z > LOG_SPACE_THRESHOLD {
        (-ln_sinh(z)).exp()
    } else {
        1.0 / z.sinh()
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `(4πt)^{−d/2} exp(−|x|²/(4t))` with `d = x.len()`.
pub fn heat_kernel(x: &[f64], t: f64) -> Result<f64, ClosedFormError> {
    log_heat_kernel(x, t).map(f64::exp)
}

pub fn log_heat_kernel(x: &[f64], t: f64) -> Result<f64, ClosedFormError> {
    if t <= 0.0 {
        return Err(ClosedFormError::NonPositiveTime(t));
    }
    let d = x.len() as f64;
    Ok(-0.5 * d * (4.0 * PI * t).ln() - norm2(x) / (4.0 * t))
}

/// Mehler kernel `(2π sinh(2C₁t)/C₁)^{−d/2} exp(−C₁|x|²/(2 tanh(2C₁t)))`,
/// the fundamental solution of `∂ₜu = Δu − C₁²|x|²u`.
pub fn mehler_kernel(x: &[f64], t: f64, c1: f64) -> Result<f64, ClosedFormError> {
    log_mehler_kernel(x, t, c1).map(f64::exp)
}

pub fn log_mehler_kernel(x: &[f64], t: f64, c1: f64) -> Result<f64, ClosedFormError> {
    if t <= 0.0 {
        return Err(ClosedFormError::NonPositiveTime(t));
    }
    if c1 == 0.0 {
        return Err(ClosedFormError::ZeroFrequency);
    }
    let c = c1.abs();
    let k = 2.0 * c * t;
    let d = x.len() as f64;
    Ok(-0.5 * d * ((2.0 * PI).ln() + ln_sinh(k) - c.ln()) - c * norm2(x) / (2.0 * k.tanh()))
}

/// Closed-form positive solutions used as Harnack test subjects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Heat { dim: usize },
    /// `e^{−C₂t} Γ_{C₁}(x − a, t)`, solving `∂ₜu = Δu − (C₁²|x−a|² + C₂)u`.
    Mehler { c1: f64, c2: f64, a: Vec<f64> },
    /// Solution `u = e^{f} e^{−dC₂t} Γ_C(x, t)` of the drift equation with
    /// `f = −(C₂/2)|x|²`, `V = C₁²|x|²` and `C² = C₁² + C₂²`.
    OuTransformed { dim: usize, c1: f64, c2: f64 },
}

impl KernelSpec {
    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Heat { dim } | KernelSpec::OuTransformed { dim, .. } => *dim,
            KernelSpec::Mehler { a, .. } => a.len(),
        }
    }

    /// `C = √(C₁² + C₂²)` of the transformed potential.
    fn ou_frequency(c1: f64, c2: f64) -> f64 {
        c1.hypot(c2)
    }

    pub fn log_value(&self, x: &[f64], t: f64) -> Result<f64, ClosedFormError> {
        if x.len() != self.dim() {
            return Err(ClosedFormError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            KernelSpec::Heat { .. } => log_heat_kernel(x, t),
            KernelSpec::Mehler { c1, c2, a } => {
                let shifted: Vec<f64> = x.iter().zip(a).map(|(p, q)| p - q).collect();
                Ok(log_mehler_kernel(&shifted, t, *c1)? - c2 * t)
            }
            KernelSpec::OuTransformed { dim, c1, c2 } => {
                let c = Self::ou_frequency(*c1, *c2);
                Ok(self.drift(x) - *dim as f64 * c2 * t + log_mehler_kernel(x, t, c)?)
            }
        }
    }

    pub fn value(&self, x: &[f64], t: f64) -> Result<f64, ClosedFormError> {
        self.log_value(x, t).map(f64::exp)
    }

    /// `Δₓ log u(x, t)`, constant in `x` for every family here.
    pub fn log_laplacian(&self, t: f64) -> Result<f64, ClosedFormError> {
        if t <= 0.0 {
            return Err(ClosedFormError::NonPositiveTime(t));
        }
        let d = self.dim() as f64;
        Ok(match self {
            KernelSpec::Heat { .. } => -d / (2.0 * t),
            KernelSpec::Mehler { c1, .. } => {
                let c = c1.abs();
                -d * c / (2.0 * c * t).tanh()
            }
            KernelSpec::OuTransformed { c1, c2, .. } => {
                let c = Self::ou_frequency(*c1, *c2);
                -d * c2 - d * c / (2.0 * c * t).tanh()
            }
        })
    }

    /// Drift potential `f(x)`; zero for the pure Schrödinger families.
    pub fn drift(&self, x: &[f64]) -> f64 {
        match self {
            KernelSpec::OuTransformed { c2, .. } => -0.5 * c2 * norm2(x),
            _ => 0.0,
        }
    }

    /// `Δf`, constant for the families here.
    pub fn drift_laplacian(&self) -> f64 {
        match self {
            KernelSpec::OuTransformed { dim, c2, .. } => -(*dim as f64) * c2,
            _ => 0.0,
        }
    }

    /// The rate pair for which this kernel is an equality case.
    pub fn rate_pair(&self) -> RatePair {
        match self {
            KernelSpec::Heat { dim } => RatePair::heat(*dim),
            KernelSpec::Mehler { c1, a, .. } => RatePair::quadratic(a.len(), *c1),
            KernelSpec::OuTransformed { dim, c1, c2 } => RatePair::quadratic(*dim, Self::ou_frequency(*c1, *c2)),
        }
    }
}

/// `ω` for `V = C₁²|x−a|² + C₂`:
/// `(C₁/2)(|x−y|²/sinh(2C₁T) + (|x−a|²+|y−a|²) tanh(C₁T)) + C₂T`, `T = t − s`.
pub fn omega_quadratic(x: &[f64], y: &[f64], window: TimeWindow, c1: f64, c2: f64, a: &[f64]) -> f64 {
    let c = c1.abs();
    let span = window.span();
    let k = 2.0 * c * span;
    let spread = dist2(x, a) + dist2(y, a);
    0.5 * c * (dist2(x, y) * csch(k) + spread * (c * span).tanh()) + c2 * span
}

/// `ω = |x−y|²/(4(t−s))` for `V = 0`.
pub fn omega_heat(x: &[f64], y: &[f64], window: TimeWindow) -> f64 {
    dist2(x, y) / (4.0 * window.span())
}

/// Minimiser of the quadratic-potential action at parameter `τ ∈ [0,1]`:
/// `a + [sinh(2C₁τT)(x−a) + sinh(2C₁(1−τ)T)(y−a)] / sinh(2C₁T)`.
pub fn geodesic_quadratic(x: &[f64], y: &[f64], window: TimeWindow, c1: f64, a: &[f64], tau: f64) -> Vec<f64> {
    let k = 2.0 * c1.abs() * window.span();
    let ratio = |z: f64| {
        if z <= 0.0 {
            0.0
        } else {
            (ln_sinh(z) - ln_sinh(k)).exp()
        }
    };
    let (wx, wy) = (ratio(k * tau), ratio(k * (1.0 - tau)));
    (0..x.len())
        .map(|i| a[i] + wx * (x[i] - a[i]) + wy * (y[i] - a[i]))
        .collect()
}

/// `Ṽ = |∇f|² − Δf + V`, the potential seen by `v = e^{−f}u` when `u`
/// solves `∂ₜu = Δu − 2∇f·∇u − Vu`. Non-smooth flags carry over.
pub fn drift_transform(f: &PotentialExpr, v: &PotentialExpr) -> Result<PotentialExpr, ClosedFormError> {
    if f.dim() != v.dim() {
        return Err(ClosedFormError::Dimension {
            expected: v.dim(),
            got: f.dim(),
        });
    }
    let mut tree = v.ast().clone();
    for i in 0..f.dim() {
        let g = derivative(f.ast(), i);
        let h = derivative(&g, i);
        tree = sub(add(tree, mul(g.clone(), g)), h);
    }
    Ok(PotentialExpr::from_tree(tree, v.dim()))
}

/// Optional drift factor `e^{f(x) − f(y)}` for the drifted Harnack bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftFactor {
    pub f_x: f64,
    pub f_y: f64,
}

/// `ln` of the Harnack bound `u(y,s)·β(s)/β(t)·e^{f(x)−f(y)−ω}`.
pub fn log_harnack_rhs(
    log_u_ys: f64,
    pair: &RatePair,
    window: TimeWindow,
    omega: f64,
    drift: Option<DriftFactor>,
) -> f64 {
    let shift = drift.map_or(0.0, |d| d.f_x - d.f_y);
    log_u_ys + pair.log_beta(window.s) - pair.log_beta(window.t) + shift - omega
}

pub fn harnack_rhs(u_ys: f64, pair: &RatePair, window: TimeWindow, omega: f64, drift: Option<DriftFactor>) -> f64 {
    log_harnack_rhs(u_ys.ln(), pair, window, omega, drift).exp()
}
