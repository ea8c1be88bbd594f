use super::{solve_geodesic, ActionError, AgmonResult, OmegaProvider, SolveOptions, TimeWindow};
use crate::expr::ScalarField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeOrder {
    First,
    Second,
}

/// Partial derivatives of `ω(x, y; t, s)`. Second-order fields are `None`
/// when only first derivatives were requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaDerivatives {
    pub omega: f64,
    pub dt: f64,
    pub ds: f64,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    pub lap_x: Option<f64>,
    pub lap_y: Option<f64>,
    /// `Σᵢ ∂²ω/∂xᵢ∂yᵢ`
    pub mixed: Option<f64>,
}

/// `ω` obtained by solving the geodesic problem numerically.
#[derive(Debug, Clone)]
pub struct NumericOmega {
    pub field: ScalarField,
    pub opts: SolveOptions,
    /// Spatial finite-difference step `hₓ`.
    pub space_step: f64,
    /// Temporal step as a fraction of `t − s`.
    pub time_step_fraction: f64,
}

impl NumericOmega {
    /// Steps default to `1e−3·box_size` in space and `1e−3·(t−s)` in time.
    pub fn new(field: ScalarField, box_size: f64) -> Self {
        Self {
            field,
            opts: SolveOptions::default(),
            space_step: 1e-3 * box_size,
            time_step_fraction: 1e-3,
        }
    }

    pub fn solve(&self, x: &[f64], y: &[f64], window: TimeWindow) -> Result<AgmonResult, ActionError> {
        let r = solve_geodesic(y, x, window, &self.field, &self.opts)?;
        if !r.converged() {
            return Err(ActionError::NotConverged {
                iterations: r.iterations,
                residual: r.residual,
            });
        }
        Ok(r)
    }
}

impl OmegaProvider for NumericOmega {
    fn dim(&self) -> usize {
        self.field.dim()
    }

    fn omega(&self, x: &[f64], y: &[f64], window: TimeWindow) -> Result<f64, ActionError> {
        self.solve(x, y, window).map(|r| r.omega)
    }

    fn derivatives(
        &self,
        x: &[f64],
        y: &[f64],
        window: TimeWindow,
        order: DerivativeOrder,
    ) -> Result<OmegaDerivatives, ActionError> {
        omega_derivatives(
            y,
            x,
            window,
            &self.field,
            order,
            &self.opts,
            self.space_step,
            self.time_step_fraction * window.span(),
        )
    }

    fn is_analytic(&self) -> bool {
        false
    }

    fn label(&self) -> String {
        format!(
            "numeric(V={}, n={}, tol={:e}, hx={:e}, ht={:e})",
            self.field.value_tree(),
            self.opts.n,
            self.opts.tol,
            self.space_step,
            self.time_step_fraction
        )
    }
}

struct Corner {
    label: String,
    x: Vec<f64>,
    y: Vec<f64>,
    window: TimeWindow,
}

/// Central finite differences of `ω`, re-solving the geodesic at each
/// stencil point warm-started from the base path. Time derivatives use the
/// five-point stencil; second differences use step `10·hₓ`. Stencil solves
/// run in parallel and are joined in a fixed order.
#[allow(clippy::too_many_arguments)]
pub fn omega_derivatives(
    y: &[f64],
    x: &[f64],
    window: TimeWindow,
    field: &ScalarField,
    order: DerivativeOrder,
    opts: &SolveOptions,
    hx: f64,
    ht: f64,
) -> Result<OmegaDerivatives, ActionError> {
    let d = field.dim();
    let base = solve_geodesic(y, x, window, field, opts)?;
    if !base.converged() {
        return Err(ActionError::Stencil {
            corner: "base".into(),
            reason: format!("not converged (residual {:e})", base.residual),
        });
    }
    let mut corners = Vec::new();
    let shift = |p: &[f64], i: usize, h: f64| {
        let mut q = p.to_vec();
        q[i] += h;
        q
    };
    let w = |t: f64, s: f64| TimeWindow::new(t, s);
    let (t, s) = (window.t, window.s);
    for (label, tw) in [
        ("t+ht", w(t + ht, s)),
        ("t-ht", w(t - ht, s)),
        ("t+2ht", w(t + 2.0 * ht, s)),
        ("t-2ht", w(t - 2.0 * ht, s)),
        ("s+ht", w(t, s + ht)),
        ("s-ht", w(t, s - ht)),
        ("s+2ht", w(t, s + 2.0 * ht)),
        ("s-2ht", w(t, s - 2.0 * ht)),
    ] {
        corners.push(Corner {
            label: label.into(),
            x: x.to_vec(),
            y: y.to_vec(),
            window: tw?,
        });
    }
    for i in 0..d {
        for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
            corners.push(Corner {
                label: format!("x{}{tag}hx", i + 1),
                x: shift(x, i, sign * hx),
                y: y.to_vec(),
                window,
            });
            corners.push(Corner {
                label: format!("y{}{tag}hx", i + 1),
                x: x.to_vec(),
                y: shift(y, i, sign * hx),
                window,
            });
        }
    }
    let big = 10.0 * hx;
    if order == DerivativeOrder::Second {
        for i in 0..d {
            for (sign, tag) in [(1.0, '+'), (-1.0, '-')] {
                corners.push(Corner {
                    label: format!("x{}{tag}H", i + 1),
                    x: shift(x, i, sign * big),
                    y: y.to_vec(),
                    window,
                });
                corners.push(Corner {
                    label: format!("y{}{tag}H", i + 1),
                    x: x.to_vec(),
                    y: shift(y, i, sign * big),
                    window,
                });
            }
            for (sx, sy, tag) in [(1.0, 1.0, "++"), (1.0, -1.0, "+-"), (-1.0, 1.0, "-+"), (-1.0, -1.0, "--")] {
                corners.push(Corner {
                    label: format!("x{0}y{0}{tag}H", i + 1),
                    x: shift(x, i, sx * big),
                    y: shift(y, i, sy * big),
                    window,
                });
            }
        }
    }

    let warm = SolveOptions {
        warm_start: Some(base.path.clone()),
        ..opts.clone()
    };
    let values: Vec<Result<f64, ActionError>> = corners
        .par_iter()
        .map(|c| {
            let r = solve_geodesic(&c.y, &c.x, c.window, field, &warm)?;
            if r.converged() {
                Ok(r.omega)
            } else {
                Err(ActionError::Stencil {
                    corner: c.label.clone(),
                    reason: format!("not converged (residual {:e})", r.residual),
                })
            }
        })
        .collect();
    let mut vals = Vec::with_capacity(values.len());
    for (v, c) in values.into_iter().zip(&corners) {
        match v {
            Ok(v) => vals.push(v),
            Err(e @ ActionError::Stencil { .. }) => return Err(e),
            Err(e) => {
                return Err(ActionError::Stencil {
                    corner: c.label.clone(),
                    reason: e.to_string(),
                })
            }
        }
    }

    let w0 = base.omega;
    // fourth-order central differences: ω is close to c/(t−s) for distant
    // endpoints, where the second-order stencil is biased by (hₜ/(t−s))²
    let dt = (8.0 * (vals[0] - vals[1]) - (vals[2] - vals[3])) / (12.0 * ht);
    let ds = (8.0 * (vals[4] - vals[5]) - (vals[6] - vals[7])) / (12.0 * ht);
    let mut grad_x = vec![0.0; d];
    let mut grad_y = vec![0.0; d];
    for i in 0..d {
        let o = 8 + 4 * i;
        grad_x[i] = (vals[o] - vals[o + 2]) / (2.0 * hx);
        grad_y[i] = (vals[o + 1] - vals[o + 3]) / (2.0 * hx);
    }
    let (mut lap_x, mut lap_y, mut mixed) = (None, None, None);
    if order == DerivativeOrder::Second {
        let o = 8 + 4 * d;
        let (mut lx, mut ly, mut mx) = (0.0, 0.0, 0.0);
        let h2 = big * big;
        for i in 0..d {
            let b = o + 8 * i;
            lx += (vals[b] - 2.0 * w0 + vals[b + 2]) / h2;
            ly += (vals[b + 1] - 2.0 * w0 + vals[b + 3]) / h2;
            mx += (vals[b + 4] - vals[b + 5] - vals[b + 6] + vals[b + 7]) / (4.0 * h2);
        }
        lap_x = Some(lx);
        lap_y = Some(ly);
        mixed = Some(mx);
    }
    Ok(OmegaDerivatives {
        omega: w0,
        dt,
        ds,
        grad_x,
        grad_y,
        lap_x,
        lap_y,
        mixed,
    })
}
