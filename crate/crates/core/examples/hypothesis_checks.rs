//! Check the first- and second-order hypotheses for closed-form and
//! numerical ω, and pick a comparison rate pair for a bounded Laplacian.

use harnack_lab::action::SolveOptions;
use harnack_lab::action::NumericOmega;
use harnack_lab::closedform::{HeatOmega, QuadraticOmega, RatePair};
use harnack_lab::conditions::{
    check_first_order, check_geodesic_hessian, check_second_order, check_v_convex_ball, comparison_select,
    ConditionReport, SampleSet,
};
use harnack_lab::expr::ScalarField;

fn show(r: &ConditionReport) {
    println!(
        "{:<20} {:<20} worst {:+.3e} over {} samples",
        r.condition_id.name(),
        r.verdict.to_string(),
        r.worst_residual,
        r.sample_count
    );
}

fn main() {
    let extents = [(-2.0, 2.0)];
    let grid = SampleSet::default_grid(&extents);

    println!("heat ω, A = τ, β = τ^½");
    let zero = ScalarField::parse("0", 1).unwrap();
    check_first_order(&HeatOmega { dim: 1 }, &zero, &grid).iter().for_each(show);
    show(&check_second_order(&HeatOmega { dim: 1 }, &RatePair::heat(1), &grid));
    println!("same ω with β = τ^¼");
    show(&check_second_order(&HeatOmega { dim: 1 }, &RatePair::power(1, 0.25), &grid));

    println!("quadratic ω, sinh pair");
    let q = ScalarField::parse("x1^2", 1).unwrap();
    let omega = QuadraticOmega::centered(1, 1.0, 0.0);
    show(&check_second_order(&omega, &RatePair::quadratic(1, 1.0), &grid));
    show(&check_geodesic_hessian(&omega, &q, &RatePair::quadratic(1, 1.0), &SampleSet::random(&extents, 16, 1), &SolveOptions::default()));
    show(&check_v_convex_ball(&q, &[0.0], 2.0, 8));

    println!("sin(x1) + 2, numerical ω");
    let s = ScalarField::parse("sin(x1) + 2", 1).unwrap();
    let choice = comparison_select(&s, &[(-5.0, 5.0)], 201);
    println!("comparison C = {:.6}, sup ΔV = {:.6}", choice.c, choice.sup_laplacian);
    let numeric = NumericOmega::new(s.clone(), 3.0);
    let samples = SampleSet::random(&[(-3.0, 3.0)], 24, 5);
    check_first_order(&numeric, &s, &samples).iter().for_each(show);
    show(&check_second_order(&numeric, &choice.pair, &samples));
}
