//! The action functional `E[γ;t,s]`, its minimisers (V-geodesics) and the
//! resulting Agmon metric `ω(x,y;t,s)`.
//!
//! Curves are piecewise linear on a uniform partition of `[0,1]`. The kinetic
//! term is exact on each segment and the potential term uses the trapezoid
//! rule, so the gradient of the discrete energy is a scaled copy of the
//! discrete Euler–Lagrange residual `n²Δ²γ − 2(t−s)²∇V(γ)`.

mod numeric;
mod oracle;
mod solver;

pub use numeric::{omega_derivatives, DerivativeOrder, NumericOmega, OmegaDerivatives};
pub use oracle::{omega_oracle_dp, Lattice};
pub use solver::{solve_geodesic, Method, SolveOptions, SolveStatus};

use crate::expr::ScalarField;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("invalid time window: need 0 < s < t, got t={t}, s={s}")]
    InvalidWindow { t: f64, s: f64 },
    #[error("path needs at least 2 segments, got {0}")]
    TooFewSegments(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("geodesic solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("stencil solve failed at {corner}: {reason}")]
    Stencil { corner: String, reason: String },
    #[error("the lattice oracle supports d = 1 only")]
    OracleDimension,
    #[error("endpoint {0} is not a lattice point")]
    OffLattice(f64),
    #[error("invalid lattice: {0}")]
    Lattice(String),
}

/// A pair `(t, s)` with `0 < s < t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t: f64,
    pub s: f64,
}

impl TimeWindow {
    pub fn new(t: f64, s: f64) -> Result<Self, ActionError> {
        if s > 0.0 && t > s && t.is_finite() {
            Ok(Self { t, s })
        } else {
            Err(ActionError::InvalidWindow { t, s })
        }
    }

    /// `t − s`
    pub fn span(&self) -> f64 {
        self.t - self.s
    }
}

/// Nodes `γ(i/n)`, `i = 0..=n`, of a piecewise-linear curve from `y` to `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDiscretization {
    dim: usize,
    nodes: Vec<f64>,
}

impl PathDiscretization {
    pub fn from_nodes(dim: usize, nodes: Vec<f64>) -> Result<Self, ActionError> {
        if dim == 0 || nodes.len() % dim != 0 {
            return Err(ActionError::Dimension {
                expected: dim,
                got: nodes.len(),
            });
        }
        let segments = nodes.len() / dim - 1;
        if segments < 2 {
            return Err(ActionError::TooFewSegments(segments));
        }
        Ok(Self { dim, nodes })
    }

    pub fn straight(y: &[f64], x: &[f64], n: usize) -> Result<Self, ActionError> {
        if y.len() != x.len() {
            return Err(ActionError::Dimension {
                expected: y.len(),
                got: x.len(),
            });
        }
        if n < 2 {
            return Err(ActionError::TooFewSegments(n));
        }
        let dim = y.len();
        let mut nodes = Vec::with_capacity((n + 1) * dim);
        for i in 0..=n {
            let tau = i as f64 / n as f64;
            for k in 0..dim {
                nodes.push(if i == n { x[k] } else { y[k] + tau * (x[k] - y[k]) });
            }
        }
        Ok(Self { dim, nodes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.nodes.len() / self.dim - 1
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn node_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [f64] {
        &mut self.nodes
    }

    pub fn start(&self) -> &[f64] {
        self.node(0)
    }

    pub fn end(&self) -> &[f64] {
        self.node(self.segments())
    }

    /// Translate endpoints to `(y, x)`, shifting interior nodes by the
    /// linear blend of the endpoint displacements.
    pub fn retarget(&self, y: &[f64], x: &[f64]) -> Self {
        let n = self.segments();
        let mut out = self.clone();
        let dy: Vec<f64> = y.iter().zip(self.start()).map(|(a, b)| a - b).collect();
        let dx: Vec<f64> = x.iter().zip(self.end()).map(|(a, b)| a - b).collect();
        for i in 0..=n {
            let tau = i as f64 / n as f64;
            let node = out.node_mut(i);
            for k in 0..node.len() {
                node[k] += (1.0 - tau) * dy[k] + tau * dx[k];
            }
        }
        out.node_mut(0).copy_from_slice(y);
        out.node_mut(n).copy_from_slice(x);
        out
    }

    /// Velocity `γ̇(1)` from a one-sided second-order difference.
    pub fn end_velocity(&self) -> Vec<f64> {
        let n = self.segments();
        let nf = n as f64;
        (0..self.dim)
            .map(|k| {
                nf * (1.5 * self.node(n)[k] - 2.0 * self.node(n - 1)[k] + 0.5 * self.node(n - 2)[k])
            })
            .collect()
    }

    /// Velocity `γ̇(0)` from a one-sided second-order difference.
    pub fn start_velocity(&self) -> Vec<f64> {
        let nf = self.segments() as f64;
        (0..self.dim)
            .map(|k| {
                nf * (-1.5 * self.node(0)[k] + 2.0 * self.node(1)[k] - 0.5 * self.node(2)[k])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaMethod {
    Direct,
    Shooting,
    DpOracle,
}

impl std::fmt::Display for OmegaMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OmegaMethod::Direct => "direct",
            OmegaMethod::Shooting => "shooting",
            OmegaMethod::DpOracle => "dp_oracle",
        })
    }
}

/// Value of `ω` with the minimising path and solver diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgmonResult {
    pub omega: f64,
    pub path: PathDiscretization,
    pub iterations: usize,
    /// Sup-norm of the discrete Euler–Lagrange residual.
    pub residual: f64,
    pub method: OmegaMethod,
    pub status: SolveStatus,
    /// Two starts converged to values more than 1e−6 apart.
    pub multimodal: bool,
}

impl AgmonResult {
    pub fn converged(&self) -> bool {
        matches!(self.status, SolveStatus::Converged | SolveStatus::ShootingFallback)
    }
}

/// Discrete energy on the `[0,1]` parametrisation:
/// `(n/(4(t−s))) Σ|Δγ|² + (t−s)(1/n) Σ (V(γᵢ)+V(γᵢ₊₁))/2`.
pub fn energy(path: &PathDiscretization, window: TimeWindow, field: &ScalarField) -> f64 {
    let values: Vec<f64> = (0..=path.segments()).map(|i| field.value(path.node(i))).collect();
    energy_with_values(path, window, &values)
}

pub(crate) fn energy_with_values(path: &PathDiscretization, window: TimeWindow, values: &[f64]) -> f64 {
    let n = path.segments();
    let nf = n as f64;
    let span = window.span();
    let mut kinetic = 0.0;
    for i in 0..n {
        kinetic += squared_distance(path.node(i + 1), path.node(i));
    }
    let mut potential = 0.5 * (values[0] + values[n]);
    for v in &values[1..n] {
        potential += v;
    }
    nf * kinetic / (4.0 * span) + span * potential / nf
}

/// The same quadrature written on `[s,t]`: `¼ Σ |Δγ|²/Δτ + Σ Δτ (V+V)/2`
/// with `Δτ = (t−s)/n`.
pub fn reparametrized_energy(path: &PathDiscretization, window: TimeWindow, field: &ScalarField) -> f64 {
    let n = path.segments();
    let step = window.span() / n as f64;
    let mut total = 0.0;
    let mut v_prev = field.value(path.node(0));
    for i in 0..n {
        let v_next = field.value(path.node(i + 1));
        let d2 = squared_distance(path.node(i + 1), path.node(i));
        total += 0.25 * d2 / step + step * 0.5 * (v_prev + v_next);
        v_prev = v_next;
    }
    total
}

/// Per interior node: `n²(γᵢ₊₁ − 2γᵢ + γᵢ₋₁) − 2(t−s)²∇V(γᵢ)`.
pub fn el_residual(path: &PathDiscretization, window: TimeWindow, field: &ScalarField) -> Vec<Vec<f64>> {
    let n = path.segments();
    let n2 = (n * n) as f64;
    let k = 2.0 * window.span() * window.span();
    let mut grad = vec![0.0; path.dim()];
    (1..n)
        .map(|i| {
            field.gradient_into(path.node(i), &mut grad);
            (0..path.dim())
                .map(|c| {
                    n2 * (path.node(i + 1)[c] - 2.0 * path.node(i)[c] + path.node(i - 1)[c]) - k * grad[c]
                })
                .collect()
        })
        .collect()
}

pub fn el_residual_sup(path: &PathDiscretization, window: TimeWindow, field: &ScalarField) -> f64 {
    el_residual(path, window, field)
        .iter()
        .flatten()
        .fold(0.0_f64, |m, r| m.max(r.abs()))
}

/// Anything that can supply `ω` and its derivatives at `(x, y; t, s)`.
pub trait OmegaProvider: Sync {
    fn dim(&self) -> usize;

    fn omega(&self, x: &[f64], y: &[f64], window: TimeWindow) -> Result<f64, ActionError>;

    fn derivatives(
        &self,
        x: &[f64],
        y: &[f64],
        window: TimeWindow,
        order: DerivativeOrder,
    ) -> Result<OmegaDerivatives, ActionError>;

    /// Closed-form providers are held to the tighter analytic tolerances.
    fn is_analytic(&self) -> bool;

    /// Stable description, part of report hashes.
    fn label(&self) -> String;
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}
