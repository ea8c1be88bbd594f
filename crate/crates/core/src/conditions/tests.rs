use super::*;
use crate::action::NumericOmega;
use crate::closedform::{HeatOmega, QuadraticOmega};

fn field(src: &str, d: usize) -> ScalarField {
    ScalarField::parse(src, d).unwrap()
}

#[test]
fn heat_first_and_second_order_equalities() {
    for d in [1, 2] {
        let ext = vec![(-3.0, 3.0); d];
        let samples = SampleSet::tensor(&ext, 4, &[0.2, 1.0, 2.0], &[0.25, 0.75]);
        let p = HeatOmega { dim: d };
        let [rx, ry] = check_first_order(&p, &field("0", d), &samples);
        assert_eq!(rx.verdict, Verdict::HoldsWithEquality, "{rx:?}");
        assert_eq!(ry.verdict, Verdict::HoldsWithEquality);
        let r = check_second_order(&p, &RatePair::heat(d), &samples);
        assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");
    }
}

#[test]
fn quadratic_equalities_with_offset() {
    let p = QuadraticOmega {
        c1: 0.8,
        c2: 0.3,
        a: vec![0.2, -0.1],
    };
    let v = field("0.64*((x1 - 0.2)^2 + (x2 + 0.1)^2) + 0.3", 2);
    let samples = SampleSet::default_grid(&[(-2.0, 2.0), (-2.0, 2.0)]);
    assert_eq!(samples.len(), 64 * 64 * 12);
    let [rx, ry] = check_first_order(&p, &v, &samples);
    assert_eq!(rx.verdict, Verdict::HoldsWithEquality, "{rx:?}");
    assert_eq!(ry.verdict, Verdict::HoldsWithEquality, "{ry:?}");
    let r = check_second_order(&p, &RatePair::quadratic(2, 0.8), &samples);
    assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");
}

#[test]
fn wrong_beta_quarter_power_is_violated() {
    let samples = SampleSet::tensor(&[(-1.0, 1.0)], 3, &[1.0], &[0.5]);
    let r = check_second_order(&HeatOmega { dim: 1 }, &RatePair::power(1, 0.25), &samples);
    assert_eq!(r.verdict, Verdict::Violated);
    // LHS = (t−s)/2 = 0.25, RHS = (t−s)/4 = 0.125
    assert!((r.worst_residual + 0.125).abs() < 1e-12);
}

#[test]
fn full_power_beta_holds_with_margin() {
    let samples = SampleSet::tensor(&[(-1.0, 1.0)], 3, &[1.0], &[0.5]);
    let r = check_second_order(&HeatOmega { dim: 1 }, &RatePair::power(1, 1.0), &samples);
    assert_eq!(r.verdict, Verdict::Holds);
    assert!((r.worst_residual - 0.25).abs() < 1e-12);
}

#[test]
fn numeric_first_order_for_sine() {
    let v = field("sin(x1) + 2", 1);
    let p = NumericOmega::new(v.clone(), 6.0);
    let samples = SampleSet::random(&[(-3.0, 3.0)], 200, 7);
    let [rx, ry] = check_first_order(&p, &v, &samples);
    assert_eq!(rx.failed_samples, 0);
    assert!(rx.worst_residual >= -1e-4, "{rx:?}");
    assert!(ry.worst_residual >= -1e-4, "{ry:?}");
    assert_ne!(rx.verdict, Verdict::Violated);
}

#[test]
fn second_order_integral_examples() {
    let opts = SolveOptions::default();
    let win = TimeWindow::new(1.0, 0.5).unwrap();
    let zero = field("0", 1);
    let g = solve_geodesic(&[0.0], &[1.0], win, &zero, &opts).unwrap();
    let r = check_second_order_integral(&zero, &RatePair::heat(1), &g, win);
    assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");

    let q = field("2*x1^2", 1);
    let g = solve_geodesic(&[-0.3], &[1.0], win, &q, &opts).unwrap();
    let r = check_second_order_integral(&q, &RatePair::quadratic(1, 2f64.sqrt()), &g, win);
    assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");

    let s = field("sin(x1) + 2", 1);
    let g = solve_geodesic(&[-1.0], &[2.0], win, &s, &opts).unwrap();
    let r = check_second_order_integral(&s, &RatePair::quadratic(1, 0.5f64.sqrt()), &g, win);
    assert!(matches!(r.verdict, Verdict::Holds | Verdict::HoldsWithEquality), "{r:?}");
}

#[test]
fn geodesic_hessian_examples() {
    let opts = SolveOptions::default();
    let one = SampleSet::tensor(&[(1.0, 1.0)], 1, &[1.0], &[0.5]);
    let mut single = one.clone();
    single.samples[0].y = vec![0.0];
    let r = check_geodesic_hessian(&HeatOmega { dim: 1 }, &field("0", 1), &RatePair::heat(1), &single, &opts);
    assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");
    assert!(r.max_abs_residual < 1e-12);

    let samples = SampleSet::tensor(&[(-1.0, 1.0)], 3, &[1.0, 2.0], &[0.5]);
    let q = QuadraticOmega::centered(1, 1.0, 0.0);
    let r = check_geodesic_hessian(&q, &field("x1^2", 1), &RatePair::quadratic(1, 1.0), &samples, &opts);
    assert_eq!(r.verdict, Verdict::HoldsWithEquality, "{r:?}");

    let s = field("sin(x1) + 2", 1);
    let p = NumericOmega::new(s.clone(), 6.0);
    let samples = SampleSet::tensor(&[(-2.0, 2.0)], 3, &[1.0], &[0.5]);
    let r = check_geodesic_hessian(&p, &s, &RatePair::heat(1), &samples, &opts);
    assert_ne!(r.verdict, Verdict::Violated, "{r:?}");
}

#[test]
fn v_convex_ball_examples() {
    for d in [1, 2, 3] {
        let a = vec![0.5; d];
        let src: Vec<String> = (1..=d).map(|i| format!("(x{i} - 0.5)^2")).collect();
        let v = field(&src.join(" + "), d);
        for radius in [0.5, 1.0, 2.0, 5.0] {
            let r = check_v_convex_ball(&v, &a, radius, 16);
            assert_eq!(r.verdict, Verdict::Holds);
            assert!((r.worst_residual - 2.0 * radius).abs() < 1e-10);
        }
    }
    let r = check_v_convex_ball(&field("0", 2), &[0.0, 0.0], 1.0, 8);
    assert_eq!(r.verdict, Verdict::Holds);
    let r = check_v_convex_ball(&field("-x1", 2), &[0.0, 0.0], 1.0, 8);
    assert_eq!(r.verdict, Verdict::Violated);
    assert!((r.worst_residual + 1.0).abs() < 1e-12);
}

#[test]
fn boundary_velocity_on_quadratic_ball() {
    let v = field("x1^2 + x2^2", 2);
    let ys = vec![vec![0.0, 0.0], vec![0.3, -0.2], vec![-0.5, 0.4]];
    let win = TimeWindow::new(1.0, 0.5).unwrap();
    let r = check_boundary_velocity(&v, &[0.0, 0.0], 1.0, 8, &ys, win, &SolveOptions::default());
    assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    assert_eq!(r.sample_count, 24);
    assert_eq!(r.note.as_deref(), Some("all geodesic nodes inside the ball"));
}

#[test]
fn beta_and_diagonal_limits() {
    let r = check_beta_boundary_limits(&RatePair::heat(1), &HeatOmega { dim: 1 }, &[1.0], &[0.0], 0.5, 0.0);
    assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    let w = TimeWindow::new(0.501, 0.5).unwrap();
    assert!((HeatOmega { dim: 1 }.omega(&[1.0], &[0.0], w).unwrap() - 250.0).abs() < 1e-6);
    assert!((RatePair::heat(2).beta(1e-6) - 1e-6).abs() < 1e-18);

    let q = QuadraticOmega::centered(1, 1.0, 0.0);
    let r = check_beta_boundary_limits(&RatePair::quadratic(1, 1.0), &q, &[0.7], &[0.0], 0.5, 0.0);
    assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
    let w = TimeWindow::new(0.5 + 1e-6, 0.5).unwrap();
    assert!(q.omega(&[0.0], &[0.0], w).unwrap().abs() < 1e-15);

    let n = NumericOmega::new(field("sin(x1) + 2", 1), 6.0);
    let r = check_beta_boundary_limits(&RatePair::heat(1), &n, &[1.0], &[0.0], 0.5, 0.0);
    assert_eq!(r.verdict, Verdict::Holds, "{r:?}");
}

#[test]
fn comparison_selection() {
    let s = comparison_select(&field("sin(x1) + 2", 1), &[(-5.0, 5.0)], 2001);
    assert!((s.c - 0.5f64.sqrt()).abs() < 1e-12, "{}", s.c);
    assert!((s.sup_laplacian - 1.0).abs() < 1e-5);
    assert_eq!(s.report.verdict, Verdict::Holds);

    let s = comparison_select(&field("1.5^2 * x1^2", 1), &[(-2.0, 2.0)], 11);
    assert!(s.c >= 1.5 && s.c < 1.5 * 2f64.powf(1.0 / 16.0));

    let s = comparison_select(&field("0", 2), &[(-1.0, 1.0), (-1.0, 1.0)], 5);
    assert_eq!(s.c, comparison_grid_value(COMPARISON_GRID.0));
    assert!(s.report.note.is_some());

    let s = comparison_select(&field("exp(x1^2)", 1), &[(-30.0, 30.0)], 11);
    assert_eq!(s.report.verdict, Verdict::Inconclusive);
}

#[test]
fn verdict_is_monotone_in_tolerance() {
    let r = ConditionReport::from_residuals(
        ConditionId::SecondOrder,
        vec![Some((-2e-5, vec![])), Some((1e-3, vec![]))],
        Tolerances::NUMERIC,
    );
    assert_eq!(r.verdict, Verdict::Holds);
    assert_eq!(r.rejudged(Tolerances::ANALYTIC), Verdict::Violated);
    let failed = ConditionReport::from_residuals(ConditionId::SecondOrder, vec![None, Some((0.0, vec![]))], Tolerances::NUMERIC);
    assert_eq!(failed.verdict, Verdict::Inconclusive);
}
