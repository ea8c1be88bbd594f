use super::{ActionError, TimeWindow};
use crate::expr::ScalarField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Space–time lattice for the brute-force oracle: `m` equally spaced
/// points on `[lo, hi]` and `k` time slices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub lo: f64,
    pub hi: f64,
    pub m: usize,
    pub k: usize,
}

impl Lattice {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.m - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.lo + self.spacing() * j as f64
    }

    fn index_of(&self, v: f64) -> Result<usize, ActionError> {
        let h = self.spacing();
        let j = ((v - self.lo) / h).round();
        if j < 0.0 || j > (self.m - 1) as f64 || (self.point(j as usize) - v).abs() > 1e-9 * h.max(1.0) {
            return Err(ActionError::OffLattice(v));
        }
        Ok(j as usize)
    }
}

/// Minimum of the lattice action over all piecewise-linear paths visiting
/// one lattice point per time slice, by dynamic programming in `O(k m²)`.
///
/// Layer cost: `(x′−x)² k/(4(t−s)) + ((t−s)/k)(V(x)+V(x′))/2`.
pub fn omega_oracle_dp(
    y: &[f64],
    x: &[f64],
    window: TimeWindow,
    field: &ScalarField,
    lattice: Lattice,
) -> Result<f64, ActionError> {
    if field.dim() != 1 || y.len() != 1 || x.len() != 1 {
        return Err(ActionError::OracleDimension);
    }
    if lattice.k < 2 || lattice.m < 3 || !(lattice.hi > lattice.lo) {
        return Err(ActionError::Lattice(format!(
            "need k ≥ 2, m ≥ 3 and hi > lo, got {lattice:?}"
        )));
    }
    let start = lattice.index_of(y[0])?;
    let end = lattice.index_of(x[0])?;
    let m = lattice.m;
    let kf = lattice.k as f64;
    let span = window.span();
    let kinetic = kf / (4.0 * span);
    let dt = span / kf;
    let points: Vec<f64> = (0..m).map(|j| lattice.point(j)).collect();
    let v: Vec<f64> = points.iter().map(|&p| field.value(&[p])).collect();

    let mut cost = vec![f64::INFINITY; m];
    cost[start] = 0.0;
    for layer in 1..=lattice.k {
        let prev = &cost;
        let targets: Vec<usize> = if layer == lattice.k { vec![end] } else { (0..m).collect() };
        let next_vals: Vec<f64> = targets
            .par_iter()
            .map(|&to| {
                let mut best = f64::INFINITY;
                for from in 0..m {
                    let c = prev[from];
                    if c.is_finite() {
                        let dx = points[to] - points[from];
                        let total = c + dx * dx * kinetic + 0.5 * dt * (v[from] + v[to]);
                        if total < best {
                            best = total;
                        }
                    }
                }
                best
            })
            .collect();
        let mut next = vec![f64::INFINITY; m];
        for (to, val) in targets.into_iter().zip(next_vals) {
            next[to] = val;
        }
        cost = next;
    }
    Ok(cost[end])
}
