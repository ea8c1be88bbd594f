use super::{BoxGrid, Scheme};
use crate::linalg::TridiagonalLu;
use rayon::prelude::*;

/// Pre-factored line solves for one time-step size.
pub(super) struct Stepper {
    nx: usize,
    dim: usize,
    scheme: Scheme,
    /// Explicit weight `dt/2` for Crank–Nicolson.
    c: f64,
    /// Potential share per sweep: `V` in 1D, `V/2` in 2D.
    w: Vec<f64>,
    inv_h2: [f64; 2],
    x_lines: Vec<TridiagonalLu>,
    y_lines: Vec<TridiagonalLu>,
}

/// `I − c(∂² − w)` on one line with ghost-node Neumann rows.
fn line_lu(n: usize, inv_h2: f64, c: f64, w: impl Fn(usize) -> f64) -> Option<TridiagonalLu> {
    let off = -c * inv_h2;
    let diag: Vec<f64> = (0..n).map(|k| 1.0 + c * (2.0 * inv_h2 + w(k))).collect();
    let mut lower = vec![off; n];
    let mut upper = vec![off; n];
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    upper[0] = 2.0 * off;
    lower[n - 1] = 2.0 * off;
    TridiagonalLu::new(&lower, &diag, &upper)
}

impl Stepper {
    pub(super) fn new(grid: &BoxGrid, potential: &[f64], dt: f64, scheme: Scheme) -> Option<Self> {
        let nx = grid.nx;
        let dim = grid.dim();
        let share = if dim == 1 { 1.0 } else { 0.5 };
        let w: Vec<f64> = potential.iter().map(|v| share * v).collect();
        let c_imp = match scheme {
            Scheme::CrankNicolson => 0.5 * dt,
            Scheme::BackwardEuler => dt,
        };
        let inv_h2 = [
            1.0 / grid.spacing(0).powi(2),
            if dim == 2 { 1.0 / grid.spacing(1).powi(2) } else { 0.0 },
        ];
        let lines = if dim == 1 { 1 } else { nx };
        let x_lines = (0..lines)
            .map(|j| line_lu(nx, inv_h2[0], c_imp, |i| w[i + nx * j]))
            .collect::<Option<Vec<_>>>()?;
        let y_lines = if dim == 2 {
            (0..nx)
                .map(|i| line_lu(nx, inv_h2[1], c_imp, |j| w[i + nx * j]))
                .collect::<Option<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Some(Self {
            nx,
            dim,
            scheme,
            c: 0.5 * dt,
            w,
            inv_h2,
            x_lines,
            y_lines,
        })
    }

    /// `u + c(∂²u − w·u)` along `axis`.
    fn explicit(&self, u: &[f64], axis: usize) -> Vec<f64> {
        let nx = self.nx;
        let stride = if axis == 0 { 1 } else { nx };
        let ih2 = self.inv_h2[axis];
        let c = self.c;
        (0..u.len())
            .into_par_iter()
            .map(|k| {
                let i = (k / stride) % nx;
                let left = if i == 0 { u[k + stride] } else { u[k - stride] };
                let right = if i == nx - 1 { u[k - stride] } else { u[k + stride] };
                u[k] + c * ((left - 2.0 * u[k] + right) * ih2 - self.w[k] * u[k])
            })
            .collect()
    }

    fn solve_x(&self, u: &mut [f64]) {
        u.par_chunks_mut(self.nx)
            .zip(self.x_lines.par_iter())
            .for_each(|(line, lu)| lu.solve(line));
    }

    fn solve_y(&self, u: &mut [f64]) {
        let nx = self.nx;
        let mut t = transpose(u, nx);
        t.par_chunks_mut(nx)
            .zip(self.y_lines.par_iter())
            .for_each(|(line, lu)| lu.solve(line));
        u.copy_from_slice(&transpose(&t, nx));
    }

    pub(super) fn step(&self, u: &mut Vec<f64>) {
        match (self.dim, self.scheme) {
            (1, Scheme::CrankNicolson) => {
                let mut r = self.explicit(u, 0);
                self.solve_x(&mut r);
                *u = r;
            }
            (1, Scheme::BackwardEuler) => self.solve_x(u),
            (_, Scheme::CrankNicolson) => {
                let mut half = self.explicit(u, 1);
                self.solve_x(&mut half);
                let mut r = self.explicit(&half, 0);
                self.solve_y(&mut r);
                *u = r;
            }
            (_, Scheme::BackwardEuler) => {
                self.solve_x(u);
                self.solve_y(u);
            }
        }
    }
}

fn transpose(u: &[f64], nx: usize) -> Vec<f64> {
    let mut t = vec![0.0; u.len()];
    for j in 0..nx {
        for i in 0..nx {
            t[j + nx * i] = u[i + nx * j];
        }
    }
    t
}
