//! Solve ∂ₜu = Δu − Vu with Neumann walls and compare with the Mehler
//! kernel.

use harnack_lab::closedform::mehler_kernel;
use harnack_lab::expr::ScalarField;
use harnack_lab::pde::{solve, stability_probe, BoxGrid, InitialData, Scheme};

fn main() {
    let v = ScalarField::parse("x1^2", 1).unwrap();
    let grid = BoxGrid::new(vec![(-8.0, 8.0)], 801, 1e-3, vec![0.3, 0.5]).unwrap();
    let advice = stability_probe(&grid, &v);
    println!("suggested dt {:.3e} (max |V| {})", advice.dt, advice.max_abs_potential);

    let u0 = InitialData::MehlerSnapshot { t0: 0.1, c1: 1.0 };
    let sol = solve(&v, &u0, &grid, Scheme::CrankNicolson).unwrap();
    for snap in &sol.snapshots {
        let t = 0.1 + snap.t;
        let worst = (0..grid.node_count())
            .map(|k| grid.point(k))
            .filter(|p| p[0].abs() <= 4.0)
            .map(|p| {
                let exact = mehler_kernel(&p, t, 1.0).unwrap();
                (sol.interpolate(&snap.values, &p) / exact - 1.0).abs()
            })
            .fold(0.0, f64::max);
        println!("t = {:.1}: max relative error on |x| ≤ 4 is {worst:.2e}", snap.t);
    }
    println!("min value {:.3e}, boundary flux {:.2e}", sol.min_value, sol.max_boundary_flux());

    // 2D with backward Euler
    let v2 = ScalarField::parse("x1^2 + x2^2", 2).unwrap();
    let g2 = BoxGrid::new(vec![(-4.0, 4.0); 2], 81, 2e-3, vec![0.5]).unwrap();
    let gauss = InitialData::Gaussian { center: vec![0.5, -0.5], width: 1.0 };
    let s2 = solve(&v2, &gauss, &g2, Scheme::BackwardEuler).unwrap();
    println!("2D u(0, 0.5) = {:.6}", s2.value_at(0.5, &[0.0, 0.0]).unwrap());
}
