//! Solve on growing boxes and watch the Harnack ratios and the solution
//! settle on the common interior.

use harnack_lab::closedform::{QuadraticOmega, RatePair};
use harnack_lab::expr::ScalarField;
use harnack_lab::pde::{InitialData, Scheme};
use harnack_lab::verify::{nested_domain_probe, NestedSetup, SamplerConfig};

fn main() {
    let setup = NestedSetup {
        potential: ScalarField::parse("x1^2", 1).unwrap(),
        initial: InitialData::Gaussian { center: vec![0.0], width: 1.0 },
        half_widths: vec![3.0, 4.0, 6.0, 8.0],
        spacing: 0.05,
        dt: 1e-3,
        snapshot_times: vec![0.2, 0.5, 1.0],
        compare_radius: 2.0,
        scheme: Scheme::CrankNicolson,
    };
    let sampler = SamplerConfig::new(1000, 2, vec![(-2.0, 2.0)], (0.2, 1.0));
    let probe = nested_domain_probe(&setup, &RatePair::quadratic(1, 1.0), &QuadraticOmega::centered(1, 1.0, 0.0), &sampler, 2e-3)
        .unwrap();
    println!("{:>4} {:>5} {:>10} {:>12}", "L", "nx", "min ratio", "sup diff");
    for r in &probe.rows {
        let diff = r.sup_diff_from_previous.map_or("-".to_string(), |d| format!("{d:.2e}"));
        println!("{:>4} {:>5} {:>10.6} {:>12}", r.half_width, r.nx, r.min_ratio, diff);
    }
    println!("stabilizing: {}", probe.stabilizing);
}
