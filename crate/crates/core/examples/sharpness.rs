//! Locate the equality points of the Mehler kernel and compare them with
//! the characteristic set sinh(2s)x = sinh(2t)y.

use harnack_lab::action::TimeWindow;
use harnack_lab::closedform::{KernelSpec, QuadraticOmega};
use harnack_lab::verify::{sharpness_locate, LineSearch};

fn main() {
    let kernel = KernelSpec::Mehler { c1: 1.0, c2: 0.0, a: vec![0.0] };
    let pair = kernel.rate_pair();
    let omega = QuadraticOmega::centered(1, 1.0, 0.0);
    println!("{:>5} {:>5} {:>5} {:>12} {:>12} {:>10}", "x", "t", "s", "y*", "expected", "ratio-1");
    for (x, t, s) in [(1.0, 1.0, 0.5), (0.5, 2.0, 0.5), (2.0, 0.7, 0.3), (0.0, 1.0, 0.5)] {
        let w = TimeWindow::new(t, s).unwrap();
        let p = sharpness_locate(&kernel, &pair, &omega, &[x], w, &LineSearch::default()).unwrap();
        println!(
            "{x:>5} {t:>5} {s:>5} {:>12.8} {:>12.8} {:>10.2e}",
            p.y_star[0],
            p.expected[0],
            p.ratio - 1.0
        );
    }
}
