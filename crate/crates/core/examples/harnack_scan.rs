//! Sample quadruples on a grid solution, scan the Harnack ratio and triage
//! violations on a refined grid.

use harnack_lab::closedform::{QuadraticOmega, RatePair};
use harnack_lab::expr::ScalarField;
use harnack_lab::pde::{solve, BoxGrid, InitialData, Scheme};
use harnack_lab::verify::{harnack_scan_sampled, triage, SamplerConfig, Subject};

fn main() {
    let v = ScalarField::parse("x1^2", 1).unwrap();
    let grid = BoxGrid::new(vec![(-8.0, 8.0)], 321, 1e-3, vec![0.2, 0.5, 1.0]).unwrap();
    let u0 = InitialData::Gaussian { center: vec![0.0], width: 1.0 };
    let sol = solve(&v, &u0, &grid, Scheme::CrankNicolson).unwrap();
    let omega = QuadraticOmega::centered(1, 1.0, 0.0);
    let cfg = SamplerConfig::new(2000, 1, vec![(-8.0, 8.0)], (0.2, 1.0));

    let good = harnack_scan_sampled(&Subject::grid(&sol), &RatePair::quadratic(1, 1.0), &omega, &cfg, 2e-3).unwrap();
    println!(
        "sinh pair: {} quadruples, min ratio {:.6}, pass {}",
        good.quadruple_count, good.min_ratio, good.pass
    );
    println!("closest to equality: {:?}", good.sharpness.first().map(|e| e.deviation));

    // β = τ^0.05 is far too small and the inequality fails
    let pair = RatePair::power(1, 0.05);
    let mut bad = harnack_scan_sampled(&Subject::grid(&sol), &pair, &omega, &cfg, 2e-3).unwrap();
    let fine = solve(&v, &u0, &grid.refined(2), Scheme::CrankNicolson).unwrap();
    triage(&mut bad, &Subject::grid(&fine), &pair, &omega).unwrap();
    println!(
        "τ^0.05 pair: min ratio {:.4}, {} violations, {} persist on the refined grid",
        bad.min_ratio,
        bad.violations.len(),
        bad.genuine_violations().count()
    );
    println!("report hash {}", bad.config_hash);
}
