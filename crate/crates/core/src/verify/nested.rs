use super::{harnack_scan, sample_quadruples, SamplerConfig, Subject, VerifyError};
use crate::action::OmegaProvider;
use crate::closedform::RatePair;
use crate::expr::ScalarField;
use crate::pde::{solve, BoxGrid, GridSolution, InitialData, Scheme};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Solves on the boxes `[−L, L]^d` for each `L` in `half_widths`, all with
/// the same node spacing so the common interior shares nodes.
#[derive(Debug, Clone)]
pub struct NestedSetup {
    pub potential: ScalarField,
    pub initial: InitialData,
    pub half_widths: Vec<f64>,
    pub spacing: f64,
    pub dt: f64,
    pub snapshot_times: Vec<f64>,
    /// Solutions are compared on `|x|∞ ≤ compare_radius`.
    pub compare_radius: f64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedRow {
    pub half_width: f64,
    pub nx: usize,
    pub min_ratio: f64,
    pub skipped: usize,
    /// `sup |u_L − u_{L_prev}|` over the comparison region and snapshots.
    pub sup_diff_from_previous: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedProbe {
    pub quadruple_count: usize,
    pub rows: Vec<NestedRow>,
    /// Successive differences never increase.
    pub stabilizing: bool,
}

/// Solve on increasing boxes, scan the same quadruples on each and measure
/// how much the solution moves on the common interior. The quadruples are
/// drawn once, from interior nodes of the smallest box.
pub fn nested_domain_probe(
    setup: &NestedSetup,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    sampler: &SamplerConfig,
    tolerance: f64,
) -> Result<NestedProbe, VerifyError> {
    let d = setup.potential.dim();
    let mut widths = setup.half_widths.clone();
    widths.sort_by(f64::total_cmp);
    let grids = widths
        .iter()
        .map(|&l| {
            let nx = (2.0 * l / setup.spacing).round() as usize + 1;
            BoxGrid::new(vec![(-l, l); d], nx, setup.dt, setup.snapshot_times.clone())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let solutions = grids
        .par_iter()
        .map(|g| solve(&setup.potential, &setup.initial, g, setup.scheme))
        .collect::<Result<Vec<GridSolution>, _>>()?;

    let smallest = solutions.first().ok_or_else(|| VerifyError::Sampler("no boxes given".into()))?;
    let quadruples = sample_quadruples(&Subject::grid(smallest), sampler)?;
    let mut rows = Vec::with_capacity(solutions.len());
    for (i, sol) in solutions.iter().enumerate() {
        let report = harnack_scan(&Subject::grid(sol), pair, provider, &quadruples, tolerance)?;
        let sup_diff = (i > 0).then(|| sup_difference(&solutions[i - 1], sol, setup.compare_radius));
        rows.push(NestedRow {
            half_width: widths[i],
            nx: sol.grid.nx,
            min_ratio: report.min_ratio,
            skipped: report.skipped,
            sup_diff_from_previous: sup_diff,
        });
    }
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.sup_diff_from_previous).collect();
    let stabilizing = diffs.windows(2).all(|w| w[1] <= w[0]);
    Ok(NestedProbe {
        quadruple_count: quadruples.len(),
        rows,
        stabilizing,
    })
}

fn sup_difference(small: &GridSolution, large: &GridSolution, radius: f64) -> f64 {
    let g = &large.grid;
    let mut worst = 0.0_f64;
    for (a, b) in small.snapshots.iter().zip(&large.snapshots) {
        for k in 0..g.node_count() {
            let p = g.point(k);
            if p.iter().all(|v| v.abs() <= radius + 1e-12) {
                worst = worst.max((b.values[k] - small.interpolate(&a.values, &p)).abs());
            }
        }
    }
    worst
}
