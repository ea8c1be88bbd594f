//! Numerical certificates for the hypotheses of the Harnack estimate.
//!
//! Every check reduces to a list of residuals with the convention that a
//! negative residual is a violation. A [`ConditionReport`] keeps the worst
//! one and a verdict derived from [`Tolerances`].

mod sampling;

pub use sampling::{Sample, SampleSet};

use crate::action::{
    solve_geodesic, AgmonResult, DerivativeOrder, OmegaProvider, SolveOptions, TimeWindow,
};
use crate::closedform::RatePair;
use crate::expr::ScalarField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionId {
    /// `∂ₜω + |∇ₓω|² ≥ V(x)`
    FirstOrderX,
    /// `∂ₛω − |∇_yω|² ≥ −V(y)`
    FirstOrderY,
    /// `A(t)²Δₓω + A(s)²Δ_yω + 2A(t)A(s)Σω_{xᵢyᵢ} ≤ A(t)²β′(t)/β(t) − A(s)²β′(s)/β(s)`
    SecondOrder,
    /// `∇ₓω·ν ≥ 0` on the boundary, through the geodesic end velocity.
    BoundaryNormal,
    /// The integral form of the second-order condition along a geodesic.
    SecondOrderIntegral,
    /// The `ω` Hessian combination bounded by the integral along the geodesic.
    GeodesicHessian,
    VConvexBall,
    BetaZeroLimit,
    /// `sup ΔV ≤ 2dC²` for the selected comparison constant.
    ComparisonBound,
    /// `Δ log u ≥ −β′/β`, or `Δ log u ≥ Δf − β′/β` with a drift.
    DifferentialHarnack,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::FirstOrderX => "first_order_x",
            ConditionId::FirstOrderY => "first_order_y",
            ConditionId::SecondOrder => "second_order",
            ConditionId::BoundaryNormal => "boundary_normal",
            ConditionId::SecondOrderIntegral => "second_order_integral",
            ConditionId::GeodesicHessian => "geodesic_hessian",
            ConditionId::VConvexBall => "v_convex_ball",
            ConditionId::BetaZeroLimit => "beta_zero_limit",
            ConditionId::ComparisonBound => "comparison_bound",
            ConditionId::DifferentialHarnack => "differential_harnack",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    HoldsWithEquality,
    Violated,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::HoldsWithEquality => "holds_with_equality",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// `violation`: residuals below `−violation` are violations.
/// `equality`: when set, all `|residual| ≤ equality` means equality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub violation: f64,
    pub equality: Option<f64>,
}

impl Tolerances {
    pub const ANALYTIC: Tolerances = Tolerances {
        violation: 1e-6,
        equality: Some(1e-8),
    };
    pub const NUMERIC: Tolerances = Tolerances {
        violation: 1e-4,
        equality: Some(1e-4),
    };
    /// Quadrature along a discretised geodesic. Applied to residuals scaled
    /// by `max(1, |RHS|)`, see [`quadrature_scale`].
    pub const QUADRATURE: Tolerances = Tolerances {
        violation: 1e-6,
        equality: Some(1e-6),
    };

    pub fn for_provider(p: &dyn OmegaProvider) -> Self {
        if p.is_analytic() {
            Self::ANALYTIC
        } else {
            Self::NUMERIC
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub sample_count: usize,
    /// Samples where the residual could not be computed.
    pub failed_samples: usize,
    /// Most negative residual (a violation when below `−tolerance`).
    pub worst_residual: f64,
    /// Largest `|residual|`, which decides equality.
    pub max_abs_residual: f64,
    pub worst_point: Vec<f64>,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
    pub note: Option<String>,
}

impl ConditionReport {
    /// Build a report from per-sample outcomes `(residual, point)`; `None`
    /// marks a failed sample.
    pub fn from_residuals(
        id: ConditionId,
        outcomes: Vec<Option<(f64, Vec<f64>)>>,
        tolerances: Tolerances,
    ) -> Self {
        let sample_count = outcomes.len();
        let mut failed = 0;
        let mut worst = f64::INFINITY;
        let mut worst_point = Vec::new();
        let mut max_abs = 0.0_f64;
        for o in outcomes {
            match o {
                Some((r, p)) if r.is_finite() => {
                    max_abs = max_abs.max(r.abs());
                    if r < worst {
                        worst = r;
                        worst_point = p;
                    }
                }
                _ => failed += 1,
            }
        }
        let verdict = if worst < -tolerances.violation {
            Verdict::Violated
        } else if failed > 0 || sample_count == 0 {
            Verdict::Inconclusive
        } else if tolerances.equality.is_some_and(|e| max_abs <= e) {
            Verdict::HoldsWithEquality
        } else {
            Verdict::Holds
        };
        Self {
            condition_id: id,
            sample_count,
            failed_samples: failed,
            worst_residual: if worst.is_finite() { worst } else { f64::NAN },
            max_abs_residual: max_abs,
            worst_point,
            verdict,
            tolerances,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Re-derive the verdict under different tolerances.
    pub fn rejudged(&self, tolerances: Tolerances) -> Verdict {
        if self.worst_residual < -tolerances.violation {
            Verdict::Violated
        } else if self.failed_samples > 0 {
            Verdict::Inconclusive
        } else if tolerances.equality.is_some_and(|e| self.max_abs_residual <= e) {
            Verdict::HoldsWithEquality
        } else {
            Verdict::Holds
        }
    }
}

fn sample_point(s: &Sample) -> Vec<f64> {
    let mut p = s.x.clone();
    p.extend_from_slice(&s.y);
    p.push(s.window.t);
    p.push(s.window.s);
    p
}

/// First-order conditions, one report each for the `x` and `y` forms.
/// `field` must be the potential that `provider` was built for.
pub fn check_first_order(
    provider: &dyn OmegaProvider,
    field: &ScalarField,
    samples: &SampleSet,
) -> [ConditionReport; 2] {
    let tol = Tolerances::for_provider(provider);
    let results: Vec<Option<(f64, f64, Vec<f64>)>> = samples
        .samples
        .par_iter()
        .map(|s| {
            let d = provider.derivatives(&s.x, &s.y, s.window, DerivativeOrder::First).ok()?;
            let gx: f64 = d.grad_x.iter().map(|g| g * g).sum();
            let gy: f64 = d.grad_y.iter().map(|g| g * g).sum();
            let rx = d.dt + gx - field.value(&s.x);
            let ry = d.ds - gy + field.value(&s.y);
            Some((rx, ry, sample_point(s)))
        })
        .collect();
    let xs = results.iter().map(|r| r.as_ref().map(|(a, _, p)| (*a, p.clone()))).collect();
    let ys = results.into_iter().map(|r| r.map(|(_, b, p)| (b, p))).collect();
    [
        ConditionReport::from_residuals(ConditionId::FirstOrderX, xs, tol),
        ConditionReport::from_residuals(ConditionId::FirstOrderY, ys, tol),
    ]
}

/// Second-order condition with rate pair `pair`; residual is
/// `RHS − LHS`.
pub fn check_second_order(provider: &dyn OmegaProvider, pair: &RatePair, samples: &SampleSet) -> ConditionReport {
    let tol = Tolerances::for_provider(provider);
    let outcomes = samples
        .samples
        .par_iter()
        .map(|s| {
            let d = provider.derivatives(&s.x, &s.y, s.window, DerivativeOrder::Second).ok()?;
            let lhs = second_order_lhs(pair, s.window, d.lap_x?, d.lap_y?, d.mixed?);
            Some((pair.second_order_rhs(s.window.t, s.window.s) - lhs, sample_point(s)))
        })
        .collect();
    ConditionReport::from_residuals(ConditionId::SecondOrder, outcomes, tol)
}

fn second_order_lhs(pair: &RatePair, w: TimeWindow, lap_x: f64, lap_y: f64, mixed: f64) -> f64 {
    let (at, as_) = (pair.a(w.t), pair.a(w.s));
    at * at * lap_x + as_ * as_ * lap_y + 2.0 * at * as_ * mixed
}

/// `∫ₛᵗ (d/2)A′(r)² + A(r)²ΔV(γ(r)) dr` along a discretised geodesic whose
/// node `i` sits at time `s + i(t−s)/n`. Composite Simpson when `n` is even,
/// trapezoid otherwise.
pub fn geodesic_integral(field: &ScalarField, pair: &RatePair, geodesic: &AgmonResult, window: TimeWindow) -> f64 {
    let path = &geodesic.path;
    let n = path.segments();
    let d = field.dim() as f64;
    let h = window.span() / n as f64;
    let f = |i: usize| {
        let r = window.s + h * i as f64;
        0.5 * d * pair.a_prime(r).powi(2) + pair.a(r).powi(2) * field.laplacian(path.node(i))
    };
    if n % 2 == 0 {
        let mut sum = f(0) + f(n);
        for i in 1..n {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        sum * h / 3.0
    } else {
        let mut sum = 0.5 * (f(0) + f(n));
        for i in 1..n {
            sum += f(i);
        }
        sum * h
    }
}

/// Simpson's error grows with the integrand, which is exponentially large
/// for sinh pairs at later times; quadrature residuals are divided by this.
pub fn quadrature_scale(rhs: f64) -> f64 {
    rhs.abs().max(1.0)
}

/// Integral form of the second-order condition for one geodesic. The
/// residual is `(RHS − LHS) / max(1, |RHS|)`.
pub fn check_second_order_integral(
    field: &ScalarField,
    pair: &RatePair,
    geodesic: &AgmonResult,
    window: TimeWindow,
) -> ConditionReport {
    let outcome = geodesic.converged().then(|| {
        let lhs = geodesic_integral(field, pair, geodesic, window);
        let rhs = pair.second_order_rhs(window.t, window.s);
        let mut p = geodesic.path.end().to_vec();
        p.extend_from_slice(geodesic.path.start());
        p.extend([window.t, window.s]);
        ((rhs - lhs) / quadrature_scale(rhs), p)
    });
    ConditionReport::from_residuals(ConditionId::SecondOrderIntegral, vec![outcome], Tolerances::QUADRATURE)
}

/// Hessian combination of `ω` against the integral along the geodesic
/// joining `y` to `x`; residual is `(RHS − LHS) / max(1, |RHS|)`. The
/// geodesic is solved numerically for every sample.
pub fn check_geodesic_hessian(
    provider: &dyn OmegaProvider,
    field: &ScalarField,
    pair: &RatePair,
    samples: &SampleSet,
    opts: &SolveOptions,
) -> ConditionReport {
    let tol = if provider.is_analytic() {
        Tolerances::QUADRATURE
    } else {
        Tolerances::NUMERIC
    };
    let outcomes = samples
        .samples
        .par_iter()
        .map(|s| {
            let d = provider.derivatives(&s.x, &s.y, s.window, DerivativeOrder::Second).ok()?;
            let g = solve_geodesic(&s.y, &s.x, s.window, field, opts).ok()?;
            if !g.converged() || g.multimodal {
                return None;
            }
            let lhs = second_order_lhs(pair, s.window, d.lap_x?, d.lap_y?, d.mixed?);
            let rhs = geodesic_integral(field, pair, &g, s.window);
            Some(((rhs - lhs) / quadrature_scale(rhs), sample_point(s)))
        })
        .collect();
    ConditionReport::from_residuals(ConditionId::GeodesicHessian, outcomes, tol)
}

/// Points on the sphere `|x − a| = R`. In one dimension these are the two
/// endpoints; in two, `count` equally spaced angles; above, seeded
/// Gaussian directions.
pub fn sphere_points(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = center.len();
    let dirs: Vec<Vec<f64>> = match d {
        1 => vec![vec![-1.0], vec![1.0]],
        2 => (0..count.max(1))
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / count.max(1) as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count.max(1))
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|a: &f64| a * a).sum::<f64>().sqrt();
                    v.into_iter().map(|a| a / n).collect()
                })
                .collect()
        }
    };
    dirs.into_iter()
        .map(|u| center.iter().zip(&u).map(|(c, e)| c + radius * e).collect())
        .collect()
}

/// V-convexity of the ball `B_R(a)`: residual `∇V(x)·ν(x)` at sampled
/// boundary points. The curvature term `|ξ|²/R` is strictly positive, so
/// a zero residual still counts as holding.
pub fn check_v_convex_ball(field: &ScalarField, center: &[f64], radius: f64, count: usize) -> ConditionReport {
    let outcomes = sphere_points(center, radius, count, 0)
        .into_iter()
        .map(|x| {
            let g = field.gradient(&x);
            let r: f64 = g.iter().zip(&x).zip(center).map(|((g, x), a)| g * (x - a) / radius).sum();
            Some((r, x))
        })
        .collect();
    ConditionReport::from_residuals(
        ConditionId::VConvexBall,
        outcomes,
        Tolerances {
            violation: 1e-12,
            equality: None,
        },
    )
}

/// End-velocity form of `∇ₓω·ν ≥ 0`: geodesics from interior points `ys`
/// to sampled boundary points `x` of `B_R(a)`, residual `γ̇(1)·ν`.
/// Also notes whether every geodesic node stayed inside the ball.
pub fn check_boundary_velocity(
    field: &ScalarField,
    center: &[f64],
    radius: f64,
    count: usize,
    ys: &[Vec<f64>],
    window: TimeWindow,
    opts: &SolveOptions,
) -> ConditionReport {
    let boundary = sphere_points(center, radius, count, 1);
    let pairs: Vec<(&Vec<f64>, &Vec<f64>)> = boundary.iter().flat_map(|x| ys.iter().map(move |y| (x, y))).collect();
    let results: Vec<(Option<(f64, Vec<f64>)>, bool)> = pairs
        .par_iter()
        .map(|(x, y)| {
            let Ok(g) = solve_geodesic(y, x, window, field, opts) else {
                return (None, true);
            };
            if !g.converged() {
                return (None, true);
            }
            let v = g.path.end_velocity();
            let r: f64 = v.iter().zip(x.iter()).zip(center).map(|((v, x), a)| v * (x - a) / radius).sum();
            let inside = (0..=g.path.segments()).all(|i| {
                let q = g.path.node(i);
                q.iter().zip(center).map(|(q, a)| (q - a) * (q - a)).sum::<f64>().sqrt() <= radius * (1.0 + 1e-9)
            });
            let mut p = x.to_vec();
            p.extend_from_slice(y);
            (Some((r, p)), inside)
        })
        .collect();
    let confined = results.iter().all(|(_, inside)| *inside);
    let outcomes = results.into_iter().map(|(o, _)| o).collect();
    ConditionReport::from_residuals(
        ConditionId::BoundaryNormal,
        outcomes,
        Tolerances {
            violation: 1e-4,
            equality: None,
        },
    )
    .with_note(if confined {
        "all geodesic nodes inside the ball"
    } else {
        "some geodesic left the ball"
    })
}

/// Behaviour as `t → s⁺` and `τ → 0`:
/// `β` decays like a positive power at `{1e−2, 1e−4, 1e−6}`;
/// `ω(x,y) ≥ |x−y|²/(4(t−s)) − α(t−s)` and `ω(z,z) ≥ −α(t−s)` for
/// `t − s ∈ {1e−1, 1e−2, 1e−3}` at base time `s`.
pub fn check_beta_boundary_limits(
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    x: &[f64],
    y: &[f64],
    s: f64,
    alpha: f64,
) -> ConditionReport {
    let mut outcomes = Vec::new();
    let taus = [1e-2, 1e-4, 1e-6];
    for w in taus.windows(2) {
        let slope = (pair.log_beta(w[0]) - pair.log_beta(w[1])) / (w[0] / w[1]).ln();
        outcomes.push(Some((slope, vec![w[1]])));
    }
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    for span in [1e-1, 1e-2, 1e-3] {
        let win = TimeWindow::new(s + span, s).expect("positive span");
        let bound = dist2 / (4.0 * span) - alpha * span;
        outcomes.push(
            provider
                .omega(x, y, win)
                .ok()
                .map(|o| ((o - bound) / bound.abs().max(1.0), vec![span])),
        );
        outcomes.push(provider.omega(x, x, win).ok().map(|o| (o + alpha * span, vec![span])));
    }
    ConditionReport::from_residuals(
        ConditionId::BetaZeroLimit,
        outcomes,
        Tolerances {
            violation: Tolerances::for_provider(provider).violation,
            equality: None,
        },
    )
}

/// Outcome of [`comparison_select`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonChoice {
    pub pair: RatePair,
    pub c: f64,
    pub sup_laplacian: f64,
    pub report: ConditionReport,
}

/// Grid `C_k = 2^{k/16}`, `k ∈ [−160, 160]`.
pub const COMPARISON_GRID: (i32, i32) = (-160, 160);

pub fn comparison_grid_value(k: i32) -> f64 {
    2f64.powf(k as f64 / 16.0)
}

/// Pick the smallest grid `C` with `sup ΔV ≤ 2dC²` over box samples and
/// return the sinh pair for that `C`.
pub fn comparison_select(field: &ScalarField, extents: &[(f64, f64)], per_axis: usize) -> ComparisonChoice {
    let d = field.dim();
    let grid = SampleSet::axis_grid(extents, per_axis);
    let (sup, at) = grid
        .par_iter()
        .map(|p| (field.laplacian(p), p.clone()))
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    let df = d as f64;
    let (lo, hi) = COMPARISON_GRID;
    let chosen = (lo..=hi)
        .map(comparison_grid_value)
        .find(|c| 2.0 * df * c * c >= sup * (1.0 - 1e-12));
    match chosen {
        Some(c) if sup.is_finite() => {
            let residual = 2.0 * df * c * c - sup;
            let mut report = ConditionReport::from_residuals(
                ConditionId::ComparisonBound,
                vec![Some((residual.max(0.0), at))],
                Tolerances {
                    violation: 0.0,
                    equality: None,
                },
            );
            if sup <= 0.0 {
                report.note = Some(
                    "ΔV ≤ 0 on the box: every C > 0 is admissible; the heat pair is the C → 0 limit".into(),
                );
            }
            ComparisonChoice {
                pair: RatePair::quadratic(d, c),
                c,
                sup_laplacian: sup,
                report,
            }
        }
        _ => {
            let c = comparison_grid_value(hi);
            ComparisonChoice {
                pair: RatePair::quadratic(d, c),
                c,
                sup_laplacian: sup,
                report: ConditionReport::from_residuals(ConditionId::ComparisonBound, vec![None], Tolerances::ANALYTIC)
                    .with_note("ΔV not bounded by any grid constant on the box samples"),
            }
        }
    }
}

#[cfg(test)]
mod tests;
