use super::{csch, dist2, omega_heat, omega_quadratic};
use crate::action::{ActionError, DerivativeOrder, OmegaDerivatives, OmegaProvider, TimeWindow};

fn check_dim(expected: usize, x: &[f64], y: &[f64]) -> Result<(), ActionError> {
    for got in [x.len(), y.len()] {
        if got != expected {
            return Err(ActionError::Dimension { expected, got });
        }
    }
    Ok(())
}

/// `ω = |x−y|²/(4(t−s))` with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatOmega {
    pub dim: usize,
}

impl OmegaProvider for HeatOmega {
    fn dim(&self) -> usize {
        self.dim
    }

    fn omega(&self, x: &[f64], y: &[f64], window: TimeWindow) -> Result<f64, ActionError> {
        check_dim(self.dim, x, y)?;
        Ok(omega_heat(x, y, window))
    }

    fn derivatives(
        &self,
        x: &[f64],
        y: &[f64],
        window: TimeWindow,
        order: DerivativeOrder,
    ) -> Result<OmegaDerivatives, ActionError> {
        check_dim(self.dim, x, y)?;
        let span = window.span();
        let d = self.dim as f64;
        let dt = -dist2(x, y) / (4.0 * span * span);
        let grad_x: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b) / (2.0 * span)).collect();
        let second = order == DerivativeOrder::Second;
        Ok(OmegaDerivatives {
            omega: omega_heat(x, y, window),
            dt,
            ds: -dt,
            grad_y: grad_x.iter().map(|g| -g).collect(),
            grad_x,
            lap_x: second.then_some(d / (2.0 * span)),
            lap_y: second.then_some(d / (2.0 * span)),
            mixed: second.then_some(-d / (2.0 * span)),
        })
    }

    fn is_analytic(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        format!("heat(d={})", self.dim)
    }
}

/// `ω` for `V = C₁²|x−a|² + C₂` with analytic derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOmega {
    pub c1: f64,
    pub c2: f64,
    pub a: Vec<f64>,
}

impl QuadraticOmega {
    pub fn centered(dim: usize, c1: f64, c2: f64) -> Self {
        Self {
            c1,
            c2,
            a: vec![0.0; dim],
        }
    }
}

impl OmegaProvider for QuadraticOmega {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn omega(&self, x: &[f64], y: &[f64], window: TimeWindow) -> Result<f64, ActionError> {
        check_dim(self.dim(), x, y)?;
        Ok(omega_quadratic(x, y, window, self.c1, self.c2, &self.a))
    }

    fn derivatives(
        &self,
        x: &[f64],
        y: &[f64],
        window: TimeWindow,
        order: DerivativeOrder,
    ) -> Result<OmegaDerivatives, ActionError> {
        check_dim(self.dim(), x, y)?;
        let c = self.c1.abs();
        let span = window.span();
        let k = 2.0 * c * span;
        let inv_s = csch(k);
        let th = (c * span).tanh();
        let sech2 = 1.0 - th * th;
        let d = self.dim() as f64;
        let xy = dist2(x, y);
        let spread = dist2(x, &self.a) + dist2(y, &self.a);
        // d/dT [1/sinh(2cT)] = −2c·coth(2cT)/sinh(2cT)
        let dt = 0.5 * c * (xy * (-2.0 * c * inv_s / k.tanh()) + spread * c * sech2) + self.c2;
        let grad = |p: &[f64], q: &[f64]| -> Vec<f64> {
            (0..p.len())
                .map(|i| c * ((p[i] - q[i]) * inv_s + (p[i] - self.a[i]) * th))
                .collect()
        };
        let second = order == DerivativeOrder::Second;
        let lap = d * c * (inv_s + th);
        Ok(OmegaDerivatives {
            omega: omega_quadratic(x, y, window, self.c1, self.c2, &self.a),
            dt,
            ds: -dt,
            grad_x: grad(x, y),
            grad_y: grad(y, x),
            lap_x: second.then_some(lap),
            lap_y: second.then_some(lap),
            mixed: second.then_some(-d * c * inv_s),
        })
    }

    fn is_analytic(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        format!("quadratic(c1={:e}, c2={:e}, a={:?})", self.c1, self.c2, self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(p: &dyn OmegaProvider, x: &[f64], y: &[f64], win: TimeWindow) {
        let d = p.derivatives(x, y, win, DerivativeOrder::Second).unwrap();
        let om = |x: &[f64], y: &[f64], w: TimeWindow| p.omega(x, y, w).unwrap();
        let h = 1e-4;
        let dt = (om(x, y, TimeWindow::new(win.t + h, win.s).unwrap())
            - om(x, y, TimeWindow::new(win.t - h, win.s).unwrap()))
            / (2.0 * h);
        let ds = (om(x, y, TimeWindow::new(win.t, win.s + h).unwrap())
            - om(x, y, TimeWindow::new(win.t, win.s - h).unwrap()))
            / (2.0 * h);
        assert!((dt - d.dt).abs() < 1e-6, "{dt} {}", d.dt);
        assert!((ds - d.ds).abs() < 1e-6);
        let (mut lx, mut ly, mut mx) = (0.0, 0.0, 0.0);
        let h2 = 1e-3;
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let g = (om(&xp, y, win) - om(&xm, y, win)) / (2.0 * h);
            assert!((g - d.grad_x[i]).abs() < 1e-6);
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[i] += h;
            ym[i] -= h;
            let g = (om(x, &yp, win) - om(x, &ym, win)) / (2.0 * h);
            assert!((g - d.grad_y[i]).abs() < 1e-6);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h2;
            xm[i] -= h2;
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[i] += h2;
            ym[i] -= h2;
            let w0 = om(x, y, win);
            lx += (om(&xp, y, win) - 2.0 * w0 + om(&xm, y, win)) / (h2 * h2);
            ly += (om(x, &yp, win) - 2.0 * w0 + om(x, &ym, win)) / (h2 * h2);
            mx += (om(&xp, &yp, win) - om(&xp, &ym, win) - om(&xm, &yp, win) + om(&xm, &ym, win))
                / (4.0 * h2 * h2);
        }
        assert!((lx - d.lap_x.unwrap()).abs() < 1e-4);
        assert!((ly - d.lap_y.unwrap()).abs() < 1e-4);
        assert!((mx - d.mixed.unwrap()).abs() < 1e-4);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let win = TimeWindow::new(1.2, 0.4).unwrap();
        fd_check(&HeatOmega { dim: 2 }, &[0.3, -1.0], &[1.1, 0.2], win);
        let q = QuadraticOmega {
            c1: 0.8,
            c2: 0.3,
            a: vec![0.2, -0.1],
        };
        fd_check(&q, &[0.3, -1.0], &[1.1, 0.2], win);
    }

    #[test]
    fn quadratic_mixed_example() {
        let q = QuadraticOmega::centered(1, 1.0, 0.0);
        let d = q
            .derivatives(&[1.0], &[0.0], TimeWindow::new(1.0, 0.5).unwrap(), DerivativeOrder::Second)
            .unwrap();
        assert!((d.mixed.unwrap() + 0.850918).abs() < 1e-6);
    }
}
