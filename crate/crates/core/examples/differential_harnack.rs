//! The differential form Δ log u ≥ −β′/β on kernels and on a grid solution.

use harnack_lab::closedform::{KernelSpec, RatePair};
use harnack_lab::expr::ScalarField;
use harnack_lab::pde::{solve, BoxGrid, InitialData, Scheme};
use harnack_lab::verify::{differential_harnack, DifferentialRegion, Subject};

fn main() {
    let region = DifferentialRegion { extents: vec![(-3.0, 3.0)], times: vec![0.1, 0.5, 2.0], per_axis: 7 };
    for k in [
        KernelSpec::Heat { dim: 1 },
        KernelSpec::Mehler { c1: 1.0, c2: 0.0, a: vec![0.0] },
        KernelSpec::OuTransformed { dim: 1, c1: 1.0, c2: 1.0 },
    ] {
        let r = differential_harnack(&Subject::Kernel(&k), &k.rate_pair(), &region, DifferentialRegion::KERNEL_TOLERANCES)
            .unwrap();
        println!("{k:?}: {} (max |residual| {:.1e})", r.verdict, r.max_abs_residual);
    }

    let v = ScalarField::parse("x1^2", 1).unwrap();
    let grid = BoxGrid::new(vec![(-8.0, 8.0)], 321, 1e-3, vec![0.1, 0.5, 1.0]).unwrap();
    let sol = solve(&v, &InitialData::Gaussian { center: vec![0.5], width: 1.0 }, &grid, Scheme::CrankNicolson).unwrap();
    let region = DifferentialRegion { extents: vec![(-8.0, 8.0)], times: vec![0.1, 0.5, 1.0], per_axis: 0 };
    let r = differential_harnack(&Subject::grid(&sol), &RatePair::quadratic(1, 1.0), &region, DifferentialRegion::GRID_TOLERANCES)
        .unwrap();
    println!("grid solution: {} with worst residual {:.3e} over {} nodes", r.verdict, r.worst_residual, r.sample_count);
}
