//! Ornstein–Uhlenbeck drift: solve through v = e^{−f}u and scan the
//! drifted Harnack inequality.

use harnack_lab::closedform::{drift_transform, KernelSpec, QuadraticOmega, RatePair};
use harnack_lab::expr::PotentialExpr;
use harnack_lab::pde::{solve_drift, BoxGrid, InitialData, Scheme};
use harnack_lab::verify::{harnack_scan_sampled, SamplerConfig, Subject};

fn main() {
    let f = PotentialExpr::parse("-0.5 * x1^2", 1).unwrap();
    let v = PotentialExpr::parse("x1^2", 1).unwrap();
    let vt = drift_transform(&f, &v).unwrap();
    println!("transformed potential: {}", vt.ast());

    let c = 2f64.sqrt();
    let omega = QuadraticOmega::centered(1, c, 1.0);
    let pair = RatePair::quadratic(1, c);

    let grid = BoxGrid::new(vec![(-6.0, 6.0)], 241, 1e-3, vec![0.2, 0.5, 1.0]).unwrap();
    let u0 = InitialData::Gaussian { center: vec![0.5], width: 0.8 };
    let sol = solve_drift(&f, &v, &u0, &grid, Scheme::CrankNicolson).unwrap();
    let cfg = SamplerConfig::new(2000, 4, vec![(-3.0, 3.0)], (0.2, 1.0));
    let r = harnack_scan_sampled(&Subject::Grid { solution: &sol, drift: Some(&f) }, &pair, &omega, &cfg, 2e-3).unwrap();
    println!("grid solution: min ratio {:.6}, pass {}", r.min_ratio, r.pass);

    let kernel = KernelSpec::OuTransformed { dim: 1, c1: 1.0, c2: 1.0 };
    let k = harnack_scan_sampled(&Subject::Kernel(&kernel), &kernel.rate_pair(), &omega, &cfg, 1e-9).unwrap();
    println!("closed-form OU solution: min ratio 1{:+.2e}", k.min_ratio - 1.0);
}
