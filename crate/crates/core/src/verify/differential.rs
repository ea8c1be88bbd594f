use super::{Subject, VerifyError, INTERIOR_MARGIN_CELLS};
use crate::closedform::RatePair;
use crate::conditions::{ConditionId, ConditionReport, SampleSet, Tolerances};
use serde::{Deserialize, Serialize};

/// Where `Δ log u ≥ Δf − β′/β` is checked. Grid subjects use every interior
/// node inside `extents` and require each time to be a snapshot; kernels
/// use a `per_axis` tensor grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialRegion {
    pub extents: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    pub per_axis: usize,
}

impl DifferentialRegion {
    /// Kernel residuals are exact up to rounding.
    pub const KERNEL_TOLERANCES: Tolerances = Tolerances {
        violation: 1e-10,
        equality: Some(1e-10),
    };
    /// Second differences of `log u` on a grid.
    pub const GRID_TOLERANCES: Tolerances = Tolerances {
        violation: 1e-3,
        equality: None,
    };
}

/// Residual `Δ log u − Δf + β′(t)/β(t)` at every point and time; negative
/// means the differential Harnack inequality fails there.
pub fn differential_harnack(
    subject: &Subject,
    pair: &RatePair,
    region: &DifferentialRegion,
    tolerances: Tolerances,
) -> Result<ConditionReport, VerifyError> {
    if region.extents.len() != subject.dim() {
        return Err(VerifyError::Dimension {
            subject: subject.dim(),
            got: region.extents.len(),
        });
    }
    let mut outcomes = Vec::new();
    match subject {
        Subject::Kernel(k) => {
            let points = SampleSet::axis_grid(&region.extents, region.per_axis);
            for &t in &region.times {
                let lap = k.log_laplacian(t)?;
                let residual = lap - k.drift_laplacian() + pair.beta_log_deriv(t);
                for p in &points {
                    let mut at = p.clone();
                    at.push(t);
                    outcomes.push(Some((residual, at)));
                }
            }
        }
        Subject::Grid { solution, drift } => {
            let grid = &solution.grid;
            let drift_lap = drift.map(|f| f.differentiate());
            let nodes: Vec<usize> = (0..grid.node_count())
                .filter(|&k| {
                    let p = grid.point(k);
                    grid.is_interior(&p, INTERIOR_MARGIN_CELLS)
                        && p.iter().zip(&region.extents).all(|(v, (lo, hi))| v >= lo && v <= hi)
                })
                .collect();
            for &t in &region.times {
                let snap = solution.snapshot(t).ok_or(VerifyError::MissingSnapshot(t))?;
                let rate = pair.beta_log_deriv(t);
                for &k in &nodes {
                    let p = grid.point(k);
                    let df = drift_lap.as_ref().map_or(0.0, |f| f.laplacian(&p));
                    let outcome = solution
                        .log_laplacian_at(&snap.values, k)
                        .map(|lap| (lap - df + rate, [p, vec![t]].concat()));
                    outcomes.push(outcome);
                }
            }
        }
    }
    Ok(ConditionReport::from_residuals(
        ConditionId::DifferentialHarnack,
        outcomes,
        tolerances,
    ))
}
