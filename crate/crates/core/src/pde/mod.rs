//! Positive solutions of `∂ₜu = Δu − Vu` on boxes with homogeneous Neumann
//! conditions, for `d ∈ {1, 2}`.
//!
//! Space is discretised by the 3-point (5-point in 2D) Laplacian with
//! ghost-node reflection at the walls. Time stepping is Crank–Nicolson
//! (Peaceman–Rachford ADI in 2D, potential split evenly between the two
//! half steps) or backward Euler. Step sizes are shrunk per interval so
//! every snapshot time is hit exactly.

mod grid;
mod stepper;

pub use grid::{BoxGrid, GridSolution, Snapshot};

use crate::closedform::{drift_transform, mehler_kernel, ClosedFormError};
use crate::expr::{PotentialExpr, ScalarField};
use serde::{Deserialize, Serialize};
use stepper::Stepper;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("initial data: {0}")]
    InitialData(String),
    #[error("non-positive value {value:e} at step {step} (t = {time}); retry with a smaller dt")]
    NonPositive { step: usize, time: f64, value: f64 },
    #[error("singular linear system at step {step}")]
    Singular { step: usize },
    #[error("dimension mismatch: grid has d = {grid}, field has d = {field}")]
    Dimension { grid: usize, field: usize },
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    CrankNicolson,
    BackwardEuler,
}

/// Initial data presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant { value: f64 },
    /// `exp(−|x − center|²/(2·width²))`
    Gaussian { center: Vec<f64>, width: f64 },
    /// Mehler kernel with frequency `c1` at time `t0`.
    MehlerSnapshot { t0: f64, c1: f64 },
    /// Any positive expression in `x1..xd`.
    Expression { source: String },
}

impl InitialData {
    /// Values at every grid node, in grid order.
    pub fn sample(&self, grid: &BoxGrid) -> Result<Vec<f64>, PdeError> {
        let d = grid.dim();
        let values: Vec<f64> = match self {
            InitialData::Constant { value } => vec![*value; grid.node_count()],
            InitialData::Gaussian { center, width } => {
                if center.len() != d || *width <= 0.0 {
                    return Err(PdeError::InitialData(format!(
                        "gaussian needs a {d}-dimensional center and positive width"
                    )));
                }
                grid.map_nodes(|x| {
                    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    (-r2 / (2.0 * width * width)).exp()
                })
            }
            InitialData::MehlerSnapshot { t0, c1 } => {
                let mut err = None;
                let v = grid.map_nodes(|x| match mehler_kernel(x, *t0, *c1) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                });
                if let Some(e) = err {
                    return Err(e.into());
                }
                v
            }
            InitialData::Expression { source } => {
                let e = PotentialExpr::parse(source, d).map_err(|e| PdeError::InitialData(e.to_string()))?;
                grid.map_nodes(|x| e.eval(x))
            }
        };
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(PdeError::InitialData(format!("initial value {bad} is not positive")));
        }
        Ok(values)
    }
}

/// Solve `∂ₜu = Δu − Vu` from `u0` with homogeneous Neumann conditions.
pub fn solve(field: &ScalarField, u0: &InitialData, grid: &BoxGrid, scheme: Scheme) -> Result<GridSolution, PdeError> {
    let values = u0.sample(grid)?;
    solve_from_values(field, values, grid, scheme)
}

pub fn solve_from_values(
    field: &ScalarField,
    mut u: Vec<f64>,
    grid: &BoxGrid,
    scheme: Scheme,
) -> Result<GridSolution, PdeError> {
    if field.dim() != grid.dim() {
        return Err(PdeError::Dimension {
            grid: grid.dim(),
            field: field.dim(),
        });
    }
    if u.len() != grid.node_count() {
        return Err(PdeError::InitialData(format!(
            "expected {} values, got {}",
            grid.node_count(),
            u.len()
        )));
    }
    let potential = grid.map_nodes(|x| field.value(x));
    let initial = u.clone();
    let mut snapshots = Vec::with_capacity(grid.snapshot_times.len());
    let mut min_value = u.iter().copied().fold(f64::INFINITY, f64::min);
    let mut t = 0.0;
    let mut step = 0;
    for &target in &grid.snapshot_times {
        let span = target - t;
        let steps = (span / grid.dt - 1e-9).ceil().max(1.0) as usize;
        let dt = span / steps as f64;
        let stepper = Stepper::new(grid, &potential, dt, scheme).ok_or(PdeError::Singular { step })?;
        for k in 0..steps {
            stepper.step(&mut u);
            step += 1;
            let time = if k + 1 == steps { target } else { t + dt * (k + 1) as f64 };
            let (m, bad) = u.iter().fold((f64::INFINITY, false), |(m, bad), &v| (m.min(v), bad || !v.is_finite()));
            if bad || m <= 0.0 {
                return Err(PdeError::NonPositive {
                    step,
                    time,
                    value: if bad { f64::NAN } else { m },
                });
            }
            min_value = min_value.min(m);
        }
        t = target;
        snapshots.push(Snapshot {
            t: target,
            values: u.clone(),
        });
    }
    Ok(GridSolution {
        grid: grid.clone(),
        initial,
        snapshots,
        min_value,
        scheme,
    })
}

/// Solve the drift equation `∂ₜu = Δu − 2∇f·∇u − Vu` through `v = e^{−f}u`,
/// which solves the Schrödinger equation with `Ṽ = |∇f|² − Δf + V`.
pub fn solve_drift(
    f: &PotentialExpr,
    v: &PotentialExpr,
    u0: &InitialData,
    grid: &BoxGrid,
    scheme: Scheme,
) -> Result<GridSolution, PdeError> {
    let vt = drift_transform(f, v)?;
    let fvals = grid.map_nodes(|x| f.eval(x));
    let v0: Vec<f64> = u0
        .sample(grid)?
        .iter()
        .zip(&fvals)
        .map(|(u, f)| u * (-f).exp())
        .collect();
    let mut sol = solve_from_values(&vt.differentiate(), v0, grid, scheme)?;
    let lift = |vals: &mut Vec<f64>| {
        for (v, f) in vals.iter_mut().zip(&fvals) {
            *v *= f.exp();
        }
    };
    lift(&mut sol.initial);
    for s in &mut sol.snapshots {
        lift(&mut s.values);
    }
    sol.min_value = sol
        .snapshots
        .iter()
        .flat_map(|s| s.values.iter())
        .chain(sol.initial.iter())
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityAdvice {
    pub dt: f64,
    pub max_abs_potential: f64,
    /// Set when the suggested step makes the solve long-running.
    pub slow: bool,
}

/// Time step with `dt·max|V| ≤ 0.1` and `dt/Δx² ≤ 10` over the grid nodes.
pub fn stability_probe(grid: &BoxGrid, field: &ScalarField) -> StabilityAdvice {
    let max_v = grid.map_nodes(|x| field.value(x).abs()).into_iter().fold(0.0, f64::max);
    let h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(f64::INFINITY, f64::min);
    let diffusive = 10.0 * h * h;
    let dt = if max_v > 0.0 { (0.1 / max_v).min(diffusive) } else { diffusive };
    StabilityAdvice {
        dt,
        max_abs_potential: max_v,
        slow: dt < 1e-5,
    }
}
