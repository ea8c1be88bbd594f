use super::ln_sinh;
use serde::{Deserialize, Serialize};

/// Strictly increasing `A` and `β` with `β(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatePair {
    /// `A(τ) = τ`, `β(τ) = τ^exponent`.
    Power { dim: usize, exponent: f64 },
    /// `A(τ) = sinh(2cτ)`, `β(τ) = sinh^{d/2}(2cτ)`.
    Sinh { dim: usize, c: f64 },
}

impl RatePair {
    /// `A = τ`, `β = τ^{d/2}`.
    pub fn heat(dim: usize) -> Self {
        RatePair::Power {
            dim,
            exponent: 0.5 * dim as f64,
        }
    }

    pub fn quadratic(dim: usize, c1: f64) -> Self {
        RatePair::Sinh { dim, c: c1.abs() }
    }

    pub fn power(dim: usize, exponent: f64) -> Self {
        RatePair::Power { dim, exponent }
    }

    pub fn dim(&self) -> usize {
        match *self {
            RatePair::Power { dim, .. } | RatePair::Sinh { dim, .. } => dim,
        }
    }

    pub fn a(&self, t: f64) -> f64 {
        match *self {
            RatePair::Power { .. } => t,
            RatePair::Sinh { c, .. } => (2.0 * c * t).sinh(),
        }
    }

    pub fn a_prime(&self, t: f64) -> f64 {
        match *self {
            RatePair::Power { .. } => 1.0,
            RatePair::Sinh { c, .. } => 2.0 * c * (2.0 * c * t).cosh(),
        }
    }

    pub fn log_beta(&self, t: f64) -> f64 {
        match *self {
            RatePair::Power { exponent, .. } => exponent * t.ln(),
            RatePair::Sinh { dim, c } => 0.5 * dim as f64 * ln_sinh(2.0 * c * t),
        }
    }

    pub fn beta(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.log_beta(t).exp()
    }

    /// `β′(t)/β(t)`
    pub fn beta_log_deriv(&self, t: f64) -> f64 {
        match *self {
            RatePair::Power { exponent, .. } => exponent / t,
            RatePair::Sinh { dim, c } => dim as f64 * c / (2.0 * c * t).tanh(),
        }
    }

    /// `A(t)²β′(t)/β(t) − A(s)²β′(s)/β(s)`
    pub fn second_order_rhs(&self, t: f64, s: f64) -> f64 {
        let g = |r: f64| self.a(r).powi(2) * self.beta_log_deriv(r);
        g(t) - g(s)
    }

    pub fn label(&self) -> String {
        match *self {
            RatePair::Power { exponent, .. } => format!("A=τ, β=τ^{exponent}"),
            RatePair::Sinh { dim, c } => format!("A=sinh(2·{c}·τ), β=sinh^{}(2·{c}·τ)", 0.5 * dim as f64),
        }
    }
}
