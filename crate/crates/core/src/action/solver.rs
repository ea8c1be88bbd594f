use super::{
    el_residual_sup, energy_with_values, ActionError, AgmonResult, OmegaMethod, PathDiscretization,
    TimeWindow,
};
use crate::expr::ScalarField;
use crate::linalg::{solve_dense, SymBanded};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Minimise the discrete energy over interior nodes.
    Direct,
    /// Integrate the Euler–Lagrange ODE and correct the initial velocity.
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    /// Best path found within the iteration budget.
    NotConverged,
    /// Shooting diverged; the direct method supplied the result.
    ShootingFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub n: usize,
    /// Threshold on the predicted energy decrease.
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Number of initial curves; 1 is the straight segment only.
    pub starts: usize,
    pub seed: u64,
    pub warm_start: Option<PathDiscretization>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n: 200,
            tol: 1e-8,
            max_iter: 10_000,
            method: Method::Direct,
            starts: 1,
            seed: 0,
            warm_start: None,
        }
    }
}

const MULTIMODAL_GAP: f64 = 1e-6;

/// Minimise `E[γ;t,s]` over curves from `y` to `x`.
///
/// Solver failures are reported through [`SolveStatus`] rather than as
/// errors; `Err` is reserved for malformed input.
pub fn solve_geodesic(
    y: &[f64],
    x: &[f64],
    window: TimeWindow,
    field: &ScalarField,
    opts: &SolveOptions,
) -> Result<AgmonResult, ActionError> {
    let dim = field.dim();
    for p in [y, x] {
        if p.len() != dim {
            return Err(ActionError::Dimension {
                expected: dim,
                got: p.len(),
            });
        }
    }
    if opts.n < 2 {
        return Err(ActionError::TooFewSegments(opts.n));
    }

    if opts.method == Method::Shooting {
        if let Some((path, iterations)) = shoot(y, x, window, field, opts.n) {
            let values: Vec<f64> = (0..=opts.n).map(|i| field.value(path.node(i))).collect();
            let omega = energy_with_values(&path, window, &values);
            if omega.is_finite() {
                return Ok(AgmonResult {
                    omega,
                    residual: el_residual_sup(&path, window, field),
                    path,
                    iterations,
                    method: OmegaMethod::Shooting,
                    status: SolveStatus::Converged,
                    multimodal: false,
                });
            }
        }
        let mut result = solve_direct(y, x, window, field, opts)?;
        if result.status == SolveStatus::Converged {
            result.status = SolveStatus::ShootingFallback;
        }
        return Ok(result);
    }
    solve_direct(y, x, window, field, opts)
}

fn solve_direct(
    y: &[f64],
    x: &[f64],
    window: TimeWindow,
    field: &ScalarField,
    opts: &SolveOptions,
) -> Result<AgmonResult, ActionError> {
    let first = match &opts.warm_start {
        Some(p) if p.segments() == opts.n && p.dim() == y.len() => p.retarget(y, x),
        _ => PathDiscretization::straight(y, x, opts.n)?,
    };
    let mut starts = vec![first];
    if opts.starts > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let scale = 1.0 + super::squared_distance(x, y).sqrt();
        for _ in 1..opts.starts {
            let amplitude: Vec<f64> = (0..y.len()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect();
            let mut p = PathDiscretization::straight(y, x, opts.n)?;
            for i in 1..opts.n {
                let bump = (std::f64::consts::PI * i as f64 / opts.n as f64).sin();
                for (c, a) in p.node_mut(i).iter_mut().zip(&amplitude) {
                    *c += a * bump;
                }
            }
            starts.push(p);
        }
    }

    let outcomes: Vec<DirectOutcome> = starts
        .into_iter()
        .map(|p| minimize(p, window, field, opts.tol, opts.max_iter))
        .collect();
    let converged: Vec<&DirectOutcome> = outcomes.iter().filter(|o| o.converged).collect();
    let pool: Vec<&DirectOutcome> = if converged.is_empty() {
        outcomes.iter().collect()
    } else {
        converged.clone()
    };
    let best = pool
        .iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .copied()
        .expect("at least one start");
    let multimodal = converged
        .iter()
        .any(|o| (o.energy - best.energy).abs() > MULTIMODAL_GAP);
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    Ok(AgmonResult {
        omega: best.energy,
        residual: el_residual_sup(&best.path, window, field),
        path: best.path.clone(),
        iterations,
        method: OmegaMethod::Direct,
        status: if best.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::NotConverged
        },
        multimodal,
    })
}

struct DirectOutcome {
    path: PathDiscretization,
    energy: f64,
    iterations: usize,
    converged: bool,
}

/// Newton's method with backtracking on the discrete energy. When the
/// Hessian is not positive definite the step falls back to gradient
/// descent preconditioned by the (always SPD) kinetic part.
fn minimize(
    mut path: PathDiscretization,
    window: TimeWindow,
    field: &ScalarField,
    tol: f64,
    max_iter: usize,
) -> DirectOutcome {
    let n = path.segments();
    let d = path.dim();
    let unknowns = (n - 1) * d;
    let span = window.span();
    let nf = n as f64;
    let spring = nf / (2.0 * span);
    let weight = span / nf;

    let node_values = |p: &PathDiscretization| -> Vec<f64> { (0..=n).map(|i| field.value(p.node(i))).collect() };
    let mut values = node_values(&path);
    let mut e = energy_with_values(&path, window, &values);

    let mut grad = vec![0.0; unknowns];
    let mut gv = vec![0.0; d];
    let mut hv = vec![0.0; d * d];
    let mut polish = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut hess = SymBanded::zeros(unknowns, d);
        for i in 1..n {
            let r = i - 1;
            field.gradient_into(path.node(i), &mut gv);
            field.hessian_into(path.node(i), &mut hv);
            for a in 0..d {
                let row = r * d + a;
                grad[row] = spring
                    * (2.0 * path.node(i)[a] - path.node(i - 1)[a] - path.node(i + 1)[a])
                    + weight * gv[a];
                hess.add(row, row, 2.0 * spring);
                for b in 0..=a {
                    hess.add(row, r * d + b, weight * hv[a * d + b]);
                }
                if r > 0 {
                    hess.add(row, row - d, -spring);
                }
            }
        }

        let mut step: Vec<f64> = grad.iter().map(|g| -g).collect();
        let newton = match hess.cholesky() {
            Some(chol) => {
                chol.solve(&mut step);
                true
            }
            None => {
                let mut kinetic = SymBanded::zeros(unknowns, d);
                for row in 0..unknowns {
                    kinetic.add(row, row, 2.0 * spring);
                    if row >= d {
                        kinetic.add(row, row - d, -spring);
                    }
                }
                kinetic
                    .cholesky()
                    .expect("kinetic operator is positive definite")
                    .solve(&mut step);
                false
            }
        };
        let slope: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
        let decrement = -0.5 * slope;
        let noise = 1e-14 * (1.0 + e.abs());
        if !(decrement > 1e-30) {
            converged = true;
            break;
        }

        let mut alpha = 1.0;
        let accepted = loop {
            let mut trial = path.clone();
            for (k, s) in step.iter().enumerate() {
                trial.nodes_mut()[d + k] += alpha * s;
            }
            let trial_values = node_values(&trial);
            let trial_e = energy_with_values(&trial, window, &trial_values);
            let armijo = trial_e <= e + 1e-4 * alpha * slope;
            // below rounding noise a full Newton step is accepted on trust
            if armijo || (newton && alpha == 1.0 && decrement < noise && trial_e.is_finite()) {
                path = trial;
                values = trial_values;
                e = trial_e;
                break true;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                break false;
            }
        };
        if !accepted {
            converged = newton && decrement < noise.max(tol);
            break;
        }
        if newton && alpha == 1.0 && decrement <= tol {
            polish += 1;
            if polish > 2 || decrement < noise {
                converged = true;
                break;
            }
        }
    }
    let _ = values;
    DirectOutcome {
        path,
        energy: e,
        iterations,
        converged,
    }
}

/// RK4 shooting on `γ̈ = 2(t−s)²∇V(γ)` with Newton on the initial velocity,
/// using the variational equation `Φ̈ = 2(t−s)² D²V(γ) Φ` for the Jacobian.
fn shoot(
    y: &[f64],
    x: &[f64],
    window: TimeWindow,
    field: &ScalarField,
    n: usize,
) -> Option<(PathDiscretization, usize)> {
    const MAX_ITER: usize = 50;
    let d = y.len();
    let k = 2.0 * window.span() * window.span();
    let scale = 1.0 + x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut v0: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();

    for it in 1..=MAX_ITER {
        let (nodes, jac) = integrate(y, &v0, k, field, n);
        let end = &nodes[n * d..];
        let miss: Vec<f64> = end.iter().zip(x).map(|(a, b)| a - b).collect();
        let miss_norm = miss.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !miss_norm.is_finite() || miss_norm > 1e8 * scale {
            return None;
        }
        if miss_norm <= 1e-12 * scale {
            let mut nodes = nodes;
            nodes[n * d..].copy_from_slice(x);
            return PathDiscretization::from_nodes(d, nodes).ok().map(|p| (p, it));
        }
        let delta = solve_dense(jac, miss.iter().map(|m| -m).collect())?;
        for (v, dv) in v0.iter_mut().zip(delta) {
            *v += dv;
        }
    }
    None
}

/// Returns the `n+1` nodes and the `d×d` sensitivity `∂γ(1)/∂v₀`.
fn integrate(y: &[f64], v0: &[f64], k: f64, field: &ScalarField, n: usize) -> (Vec<f64>, Vec<f64>) {
    let d = y.len();
    // state: position d, velocity d, Φ d², Φ̇ d²
    let size = 2 * d + 2 * d * d;
    let mut state = vec![0.0; size];
    state[..d].copy_from_slice(y);
    state[d..2 * d].copy_from_slice(v0);
    for i in 0..d {
        state[2 * d + d * d + i * d + i] = 1.0;
    }
    let mut hv = vec![0.0; d * d];
    let mut gv = vec![0.0; d];
    let mut rhs = |s: &[f64], out: &mut [f64]| {
        let pos = &s[..d];
        field.gradient_into(pos, &mut gv);
        field.hessian_into(pos, &mut hv);
        out[..d].copy_from_slice(&s[d..2 * d]);
        for a in 0..d {
            out[d + a] = k * gv[a];
        }
        let phi = &s[2 * d..2 * d + d * d];
        let phidot = &s[2 * d + d * d..];
        out[2 * d..2 * d + d * d].copy_from_slice(phidot);
        for a in 0..d {
            for b in 0..d {
                let mut acc = 0.0;
                for c in 0..d {
                    acc += hv[a * d + c] * phi[c * d + b];
                }
                out[2 * d + d * d + a * d + b] = k * acc;
            }
        }
    };

    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1) * d);
    nodes.extend_from_slice(y);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; size], vec![0.0; size], vec![0.0; size], vec![0.0; size]);
    let mut tmp = vec![0.0; size];
    for _ in 0..n {
        rhs(&state, &mut k1);
        for j in 0..size {
            tmp[j] = state[j] + 0.5 * h * k1[j];
        }
        rhs(&tmp, &mut k2);
        for j in 0..size {
            tmp[j] = state[j] + 0.5 * h * k2[j];
        }
        rhs(&tmp, &mut k3);
        for j in 0..size {
            tmp[j] = state[j] + h * k3[j];
        }
        rhs(&tmp, &mut k4);
        for j in 0..size {
            state[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        nodes.extend_from_slice(&state[..d]);
    }
    (nodes, state[2 * d..2 * d + d * d].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{energy, reparametrized_energy};

    fn quad_omega(x: f64, y: f64, span: f64, c1: f64) -> f64 {
        // independent evaluation of the quadratic-potential closed form
        0.5 * c1 * ((x - y).powi(2) / (2.0 * c1 * span).sinh() + (x * x + y * y) * (c1 * span).tanh())
    }

    #[test]
    fn free_particle_is_straight() {
        let zero = ScalarField::parse("0", 1).unwrap();
        let w = TimeWindow::new(1.0, 0.5).unwrap();
        let r = solve_geodesic(&[0.0], &[1.0], w, &zero, &SolveOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        assert!((r.omega - 0.5).abs() < 1e-12);
        for i in 0..=200 {
            assert!((r.path.node(i)[0] - i as f64 / 200.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_potential_matches_closed_form() {
        let v = ScalarField::parse("x1^2", 1).unwrap();
        let w = TimeWindow::new(1.0, 0.5).unwrap();
        let r = solve_geodesic(&[0.0], &[1.0], w, &v, &SolveOptions::default()).unwrap();
        let expect = 0.5 * (1.0 / 1.0_f64.sinh() + 0.5_f64.tanh());
        assert!((expect - 0.656518).abs() < 1e-6);
        assert!((r.omega - expect).abs() < 1e-5, "{}", r.omega);
        assert!((r.omega - quad_omega(1.0, 0.0, 0.5, 1.0)).abs() < 1e-5);
        for i in 0..=200 {
            let tau = i as f64 / 200.0;
            let exact = tau.sinh() / 1.0_f64.sinh();
            assert!((r.path.node(i)[0] - exact).abs() < 1e-6);
        }
        // both quadratures agree on the minimiser
        let a = energy(&r.path, w, &v);
        let b = reparametrized_energy(&r.path, w, &v);
        assert!((a - b).abs() < 1e-12);
        assert!(r.residual <= 10.0 * 1e-8 * 200.0 * 200.0);
    }

    #[test]
    fn coincident_endpoints_small_window() {
        let v = ScalarField::parse("x1^2", 1).unwrap();
        for span in [1e-1, 1e-2, 1e-3] {
            let w = TimeWindow::new(1.0 + span, 1.0).unwrap();
            let r = solve_geodesic(&[0.0], &[0.0], w, &v, &SolveOptions::default()).unwrap();
            assert!(r.omega >= 0.0 && r.omega < 1e-12);
        }
    }

    #[test]
    fn shooting_agrees_with_direct() {
        let v = ScalarField::parse("sin(x1) + 2", 1).unwrap();
        let w = TimeWindow::new(1.5, 0.5).unwrap();
        let direct = solve_geodesic(&[-1.0], &[2.0], w, &v, &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            method: Method::Shooting,
            ..Default::default()
        };
        let shot = solve_geodesic(&[-1.0], &[2.0], w, &v, &opts).unwrap();
        assert_eq!(shot.method, OmegaMethod::Shooting);
        assert!((shot.omega - direct.omega).abs() < 1e-6);
    }

    #[test]
    fn shooting_divergence_falls_back() {
        // exponential growth makes the miss blow past the cutoff
        let v = ScalarField::parse("exp(4*x1)", 1).unwrap();
        let w = TimeWindow::new(3.0, 0.5).unwrap();
        let opts = SolveOptions {
            method: Method::Shooting,
            n: 100,
            ..Default::default()
        };
        let r = solve_geodesic(&[-3.0], &[3.0], w, &v, &opts).unwrap();
        assert!(matches!(r.status, SolveStatus::ShootingFallback | SolveStatus::Converged));
        if r.status == SolveStatus::ShootingFallback {
            assert_eq!(r.method, OmegaMethod::Direct);
        }
    }

    #[test]
    fn iteration_budget_reports_not_converged() {
        let v = ScalarField::parse("sin(3*x1) + 2", 1).unwrap();
        let w = TimeWindow::new(2.0, 0.5).unwrap();
        let opts = SolveOptions {
            max_iter: 1,
            ..Default::default()
        };
        let r = solve_geodesic(&[-2.0], &[2.0], w, &v, &opts).unwrap();
        assert_eq!(r.status, SolveStatus::NotConverged);
        assert!(r.omega.is_finite());
    }

    #[test]
    fn two_dimensional_quadratic() {
        let v = ScalarField::parse("x1^2 + x2^2", 2).unwrap();
        let w = TimeWindow::new(0.8, 0.3).unwrap();
        let r = solve_geodesic(&[0.2, -0.4], &[1.0, 0.5], w, &v, &SolveOptions::default()).unwrap();
        let dx2 = (0.8f64).powi(2) + 0.9f64.powi(2);
        let expect = 0.5 * (dx2 / 1.0_f64.sinh() + (1.25 + 0.2) * 0.5_f64.tanh());
        assert!((r.omega - expect).abs() < 1e-5);
    }

    #[test]
    fn multistart_on_double_well() {
        let v = ScalarField::parse("(x1^2 - 1)^2", 1).unwrap();
        let w = TimeWindow::new(1.5, 0.5).unwrap();
        let opts = SolveOptions {
            starts: 5,
            seed: 7,
            ..Default::default()
        };
        let single = solve_geodesic(&[-1.0], &[1.0], w, &v, &SolveOptions::default()).unwrap();
        let multi = solve_geodesic(&[-1.0], &[1.0], w, &v, &opts).unwrap();
        assert!(multi.omega <= single.omega + 1e-12);
        assert!(multi.converged());
    }
}
