//! Minimise the action between two points and compare the numerical ω
//! with the closed form and the lattice oracle.

use harnack_lab::action::{omega_oracle_dp, solve_geodesic, Lattice, Method, SolveOptions, TimeWindow};
use harnack_lab::closedform::{geodesic_quadratic, omega_quadratic};
use harnack_lab::expr::ScalarField;

fn main() {
    let v = ScalarField::parse("x1^2", 1).unwrap();
    let w = TimeWindow::new(1.0, 0.5).unwrap();
    let (y, x) = ([0.0], [1.0]);

    let direct = solve_geodesic(&y, &x, w, &v, &SolveOptions::default()).unwrap();
    let shooting = solve_geodesic(
        &y,
        &x,
        w,
        &v,
        &SolveOptions {
            method: Method::Shooting,
            ..Default::default()
        },
    )
    .unwrap();
    let exact = omega_quadratic(&x, &y, w, 1.0, 0.0, &[0.0]);
    println!("closed form  ω = {exact:.10}");
    println!("direct       ω = {:.10} ({:?}, {} iterations)", direct.omega, direct.status, direct.iterations);
    println!("shooting     ω = {:.10} ({:?})", shooting.omega, shooting.status);

    let lattice = Lattice { lo: -2.0, hi: 2.0, m: 1601, k: 32 };
    println!("lattice dp   ω = {:.10}", omega_oracle_dp(&y, &x, w, &v, lattice).unwrap());

    let mid = direct.path.node(100)[0];
    let mid_exact = geodesic_quadratic(&x, &y, w, 1.0, &[0.0], 0.5)[0];
    println!("γ(1/2) = {mid:.8}, closed form {mid_exact:.8}");

    // double well: several starts guard against a local minimum
    let well = ScalarField::parse("(x1^2 - 1)^2", 1).unwrap();
    let opts = SolveOptions { starts: 5, seed: 3, ..Default::default() };
    let r = solve_geodesic(&[-1.0], &[1.0], TimeWindow::new(1.5, 0.5).unwrap(), &well, &opts).unwrap();
    println!("double well ω = {:.8}, multimodal {}", r.omega, r.multimodal);
}
