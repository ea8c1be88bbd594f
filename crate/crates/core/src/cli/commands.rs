use super::config::{OmegaSource, Prepared, Query, RunConfig, SharpnessQuery, VerifyMode};
use super::{Cli, CliError, Command, QueryArgs};
use crate::action::{solve_geodesic, AgmonResult, TimeWindow};
use crate::conditions::{
    check_beta_boundary_limits, check_boundary_velocity, check_first_order, check_geodesic_hessian,
    check_second_order, check_v_convex_ball, ConditionId, ConditionReport, SampleSet, Tolerances, Verdict,
};
use crate::pde::{solve, solve_drift, stability_probe, GridSolution, PdeError};
use crate::verify::{
    differential_harnack, harnack_scan_sampled, nested_domain_probe, sharpness_locate, triage, DifferentialRegion,
    HarnackReport, LineSearch, NestedSetup, SharpnessPoint, Subject, VerifyError,
};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// What a command produced. `stdout` is printed, `files` go to `--out`.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub pass: bool,
    pub stdout: String,
    pub files: Vec<(String, String)>,
    /// Set when some computation failed numerically; the exit code is 3.
    pub numerical_failure: Option<String>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn cells(v: &[f64]) -> Vec<String> {
    v.iter().map(|&x| num(x)).collect()
}

fn axis_names(prefix: &str, d: usize) -> Vec<String> {
    if d == 1 {
        vec![prefix.to_string()]
    } else {
        (1..=d).map(|i| format!("{prefix}{i}")).collect()
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable report");
    s.push('\n');
    s
}

fn pde_error(e: PdeError) -> CliError {
    match e {
        PdeError::NonPositive { .. } | PdeError::Singular { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn verify_error(e: VerifyError) -> CliError {
    match e {
        VerifyError::Pde(p) => pde_error(p),
        other => CliError::Config(other.to_string()),
    }
}

/// Run the selected subcommand.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let prepared = cli.load_config()?.prepare()?;
    match &cli.command {
        Command::Omega(q) => cmd_omega(&prepared, q),
        Command::Geodesic(q) => cmd_geodesic(&prepared, q),
        Command::Solve => cmd_solve(&prepared),
        Command::Check => cmd_check(&prepared),
        Command::Verify => cmd_verify(&prepared),
        Command::Sharpness => cmd_sharpness(&prepared),
        Command::Nested => cmd_nested(&prepared),
    }
}

fn queries(cfg: &RunConfig, args: &QueryArgs) -> Result<Vec<Query>, CliError> {
    match (&args.x, &args.y, args.t, args.s) {
        (None, None, None, None) => {
            if cfg.queries.is_empty() {
                Err(CliError::Config("no queries in config and none given by flags".into()))
            } else {
                Ok(cfg.queries.clone())
            }
        }
        (Some(x), Some(y), Some(t), Some(s)) => {
            if x.len() != cfg.dim || y.len() != cfg.dim {
                return Err(CliError::Config(format!("--x and --y need {} coordinates", cfg.dim)));
            }
            TimeWindow::new(t, s).map_err(|e| CliError::Config(e.to_string()))?;
            Ok(vec![Query {
                x: x.clone(),
                y: y.clone(),
                t,
                s,
            }])
        }
        _ => Err(CliError::Config("give all of --x, --y, --t, --s or none".into())),
    }
}

fn window(q: &Query) -> TimeWindow {
    TimeWindow { t: q.t, s: q.s }
}

fn source_name(s: OmegaSource) -> &'static str {
    match s {
        OmegaSource::ClosedHeat => "closed_heat",
        OmegaSource::ClosedQuadratic => "closed_quadratic",
        OmegaSource::Numeric => "numeric",
    }
}

/// CSV `x,y,t,s,omega,residual,method`.
pub fn cmd_omega(p: &Prepared, args: &QueryArgs) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let qs = queries(cfg, args)?;
    let opts = cfg.solve_options();
    let rows: Vec<Result<(f64, f64, String), String>> = qs
        .par_iter()
        .map(|q| match cfg.omega_source {
            OmegaSource::Numeric => match solve_geodesic(&q.y, &q.x, window(q), &p.field, &opts) {
                Ok(r) if r.converged() => Ok((r.omega, r.residual, r.method.to_string())),
                Ok(r) => Err(format!("not converged (residual {:e})", r.residual)),
                Err(e) => Err(e.to_string()),
            },
            src => p
                .provider
                .omega(&q.x, &q.y, window(q))
                .map(|o| (o, 0.0, source_name(src).to_string()))
                .map_err(|e| e.to_string()),
        })
        .collect();
    let mut header = axis_names("x", cfg.dim);
    header.extend(axis_names("y", cfg.dim));
    header.extend(["t", "s", "omega", "residual", "method"].map(String::from));
    let mut csv = header.join(",") + "\n";
    let mut failures = Vec::new();
    for (i, (q, row)) in qs.iter().zip(rows).enumerate() {
        let mut line = cells(&q.x);
        line.extend(cells(&q.y));
        line.extend([num(q.t), num(q.s)]);
        match row {
            Ok((o, r, m)) => line.extend([num(o), num(r), m]),
            Err(e) => {
                failures.push(format!("query {i}: {e}"));
                line.extend(["nan".into(), "nan".into(), "failed".into()]);
            }
        }
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    Ok(Outcome {
        pass: true,
        stdout: csv.clone(),
        files: vec![("omega.csv".into(), csv)],
        numerical_failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

/// CSV `query,i,time,x..` with node `i` at time `s + i(t−s)/n`.
pub fn cmd_geodesic(p: &Prepared, args: &QueryArgs) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let qs = queries(cfg, args)?;
    let opts = cfg.solve_options();
    let results: Vec<_> = qs
        .par_iter()
        .map(|q| solve_geodesic(&q.y, &q.x, window(q), &p.field, &opts))
        .collect();
    let mut header = vec!["query".to_string(), "i".into(), "time".into()];
    header.extend(axis_names("x", cfg.dim));
    let mut csv = header.join(",") + "\n";
    let mut summary = String::new();
    let mut failures = Vec::new();
    for (k, (q, r)) in qs.iter().zip(results).enumerate() {
        let r: AgmonResult = match r {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("query {k}: {e}"));
                continue;
            }
        };
        if !r.converged() {
            failures.push(format!("query {k}: not converged (residual {:e})", r.residual));
        }
        let n = r.path.segments();
        for i in 0..=n {
            let time = q.s + (q.t - q.s) * i as f64 / n as f64;
            let mut line = vec![k.to_string(), i.to_string(), num(time)];
            line.extend(cells(r.path.node(i)));
            csv.push_str(&line.join(","));
            csv.push('\n');
        }
        let _ = writeln!(
            summary,
            "query {k}: omega {} residual {} method {} iterations {}",
            num(r.omega),
            num(r.residual),
            r.method,
            r.iterations
        );
    }
    Ok(Outcome {
        pass: true,
        stdout: csv.clone() + &summary,
        files: vec![("geodesic.csv".into(), csv)],
        numerical_failure: (!failures.is_empty()).then(|| failures.join("; ")),
    })
}

fn solve_configured(p: &Prepared, refine: usize) -> Result<GridSolution, CliError> {
    let cfg = &p.config;
    let mut grid = cfg.grid()?;
    if refine > 1 {
        grid = grid.refined(refine);
    }
    let u0 = &cfg.solver.initial;
    match &p.drift {
        Some(f) => solve_drift(f, &p.potential, u0, &grid, cfg.solver.scheme),
        None => solve(&p.field, u0, &grid, cfg.solver.scheme),
    }
    .map_err(pde_error)
}

pub fn cmd_solve(p: &Prepared) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let grid = cfg.grid()?;
    let advice = stability_probe(&grid, &p.field);
    let sol = solve_configured(p, 1)?;
    let mut csv = Vec::new();
    sol.write_csv(&mut csv)?;
    let mut out = String::new();
    let _ = writeln!(out, "scheme {:?}", sol.scheme);
    let _ = writeln!(out, "nx {}", grid.nx);
    let _ = writeln!(out, "dt {}", num(grid.dt));
    let _ = writeln!(out, "suggested_dt {}", num(advice.dt));
    if advice.slow {
        let _ = writeln!(out, "warning: suggested dt is very small; the solve will be slow");
    }
    let _ = writeln!(out, "min_value {}", num(sol.min_value));
    let _ = writeln!(out, "max_boundary_flux {}", num(sol.max_boundary_flux()));
    let _ = writeln!(out, "snapshots {}", sol.snapshots.len());
    Ok(Outcome {
        pass: true,
        stdout: out,
        files: vec![("solution.csv".into(), String::from_utf8(csv).expect("ascii csv"))],
        numerical_failure: None,
    })
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    config: &'a RunConfig,
    config_hash: String,
    rate_pair: String,
    comparison_c: Option<f64>,
    reports: &'a [ConditionReport],
}

fn equality_type(id: ConditionId) -> bool {
    matches!(
        id,
        ConditionId::FirstOrderX
            | ConditionId::FirstOrderY
            | ConditionId::SecondOrder
            | ConditionId::SecondOrderIntegral
            | ConditionId::GeodesicHessian
    )
}

/// Geodesic-integral form of the second-order condition over samples.
fn second_order_integral_samples(p: &Prepared, samples: &SampleSet) -> ConditionReport {
    let opts = p.config.solve_options();
    let outcomes = samples
        .samples
        .par_iter()
        .map(|s| {
            let g = solve_geodesic(&s.y, &s.x, s.window, &p.field, &opts).ok()?;
            let r = crate::conditions::check_second_order_integral(&p.field, &p.pair, &g, s.window);
            r.worst_residual.is_finite().then_some((r.worst_residual, r.worst_point))
        })
        .collect();
    ConditionReport::from_residuals(ConditionId::SecondOrderIntegral, outcomes, Tolerances::QUADRATURE)
}

pub fn cmd_check(p: &Prepared) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let extents = cfg.sample_extents();
    let samples = if p.provider.is_analytic() {
        SampleSet::default_grid(&extents)
    } else {
        SampleSet::random(&extents, cfg.sampler.check_count, cfg.sampler.seed)
    };
    // Geodesic solves per sample are the expensive part; a fixed random
    // subset keeps them bounded.
    let geodesic_samples = SampleSet::random(&extents, cfg.sampler.check_count, cfg.sampler.seed);
    let opts = cfg.solve_options();
    let center = vec![0.0; cfg.dim];
    let radius = cfg.extents.iter().map(|(lo, hi)| lo.abs().min(hi.abs())).fold(f64::INFINITY, f64::min);

    let mut reports = Vec::new();
    reports.extend(check_first_order(p.provider.as_ref(), &p.field, &samples));
    reports.push(check_second_order(p.provider.as_ref(), &p.pair, &samples));
    reports.push(second_order_integral_samples(p, &geodesic_samples));
    reports.push(check_geodesic_hessian(
        p.provider.as_ref(),
        &p.field,
        &p.pair,
        &geodesic_samples,
        &opts,
    ));
    reports.push(check_v_convex_ball(&p.field, &center, radius, 16));
    let ys: Vec<Vec<f64>> = [0.0, 0.5, -0.5]
        .iter()
        .map(|f| {
            let mut y = center.clone();
            y[0] += f * radius;
            y
        })
        .collect();
    reports.push(check_boundary_velocity(
        &p.field,
        &center,
        radius,
        8,
        &ys,
        TimeWindow { t: 1.0, s: 0.5 },
        &opts,
    ));
    let mut bx = center.clone();
    bx[0] += 0.5 * radius;
    reports.push(check_beta_boundary_limits(
        &p.pair,
        p.provider.as_ref(),
        &bx,
        &center,
        0.5,
        p.effective.lower_bound_shift(),
    ));
    if let Some(c) = &p.comparison {
        reports.push(c.report.clone());
    }

    let mut out = String::new();
    let _ = writeln!(out, "rate_pair {}", p.pair.label());
    let _ = writeln!(out, "seed {}", cfg.sampler.seed);
    if let Some(c) = &p.comparison {
        let _ = writeln!(out, "comparison_c {} sup_laplacian {}", num(c.c), num(c.sup_laplacian));
    }
    for r in &reports {
        let _ = writeln!(
            out,
            "{:<22} {:<20} worst {} max_abs {} samples {} failed {}{}",
            r.condition_id.name(),
            r.verdict.to_string(),
            num(r.worst_residual),
            num(r.max_abs_residual),
            r.sample_count,
            r.failed_samples,
            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default()
        );
    }
    let violated = reports.iter().any(|r| r.verdict == Verdict::Violated);
    let all_equal = reports
        .iter()
        .filter(|r| equality_type(r.condition_id))
        .all(|r| r.verdict == Verdict::HoldsWithEquality);
    let _ = writeln!(
        out,
        "summary {}{}",
        if violated { "violated" } else { "no violations" },
        if all_equal { ", equality in every equality-type condition" } else { "" }
    );
    let body = CheckOutput {
        config: cfg,
        config_hash: cfg.hash(),
        rate_pair: p.pair.label(),
        comparison_c: p.comparison.as_ref().map(|c| c.c),
        reports: &reports,
    };
    Ok(Outcome {
        pass: !violated,
        stdout: out,
        files: vec![("check.json".into(), json(&body))],
        numerical_failure: None,
    })
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    config: &'a RunConfig,
    config_hash: String,
    mode: VerifyMode,
    rate_pair: String,
    harnack: &'a HarnackReport,
    differential: &'a ConditionReport,
    sharpness: &'a [SharpnessPoint],
    pass: bool,
}

fn default_sharpness_points(cfg: &RunConfig) -> Vec<SharpnessQuery> {
    let mut pts = Vec::new();
    for (t, s) in [(0.5, 0.25), (1.0, 0.5), (2.0, 0.5)] {
        for x0 in [0.0, 0.5, 1.0, 1.5] {
            let mut x = vec![0.0; cfg.dim];
            x[0] = x0;
            pts.push(SharpnessQuery { x, t, s });
        }
    }
    pts
}

fn locate_all(p: &Prepared) -> Result<Vec<SharpnessPoint>, CliError> {
    let cfg = &p.config;
    let kernel = cfg.kernel_spec()?;
    let reach = cfg
        .extents
        .iter()
        .map(|(lo, hi)| lo.abs().max(hi.abs()))
        .fold(0.0, f64::max);
    let search = LineSearch {
        lo: -reach,
        hi: reach,
        ..LineSearch::default()
    };
    let pts = if cfg.sharpness_points.is_empty() {
        default_sharpness_points(cfg)
    } else {
        cfg.sharpness_points.clone()
    };
    pts.par_iter()
        .map(|q| {
            let w = TimeWindow::new(q.t, q.s).map_err(|e| CliError::Config(e.to_string()))?;
            sharpness_locate(&kernel, &p.pair, p.provider.as_ref(), &q.x, w, &search).map_err(verify_error)
        })
        .collect()
}

fn sharp_ok(pt: &SharpnessPoint, tol: f64) -> bool {
    pt.on_characteristic && !pt.at_bound && (pt.ratio - 1.0).abs() <= tol
}

pub fn cmd_verify(p: &Prepared) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let tol = cfg.tolerance("harnack");
    let sampler = cfg.sampler_config();
    let region_times: Vec<f64>;
    let (report, differential, sharpness) = match cfg.mode {
        VerifyMode::Pde => {
            let sol = solve_configured(p, 1)?;
            let subject = Subject::Grid {
                solution: &sol,
                drift: p.drift.as_ref(),
            };
            let mut report =
                harnack_scan_sampled(&subject, &p.pair, p.provider.as_ref(), &sampler, tol).map_err(verify_error)?;
            if !report.violations.is_empty() {
                let fine = solve_configured(p, 2)?;
                let refined = Subject::Grid {
                    solution: &fine,
                    drift: p.drift.as_ref(),
                };
                triage(&mut report, &refined, &p.pair, p.provider.as_ref()).map_err(verify_error)?;
            }
            region_times = sol.grid.snapshot_times.iter().copied().filter(|&t| t >= 0.1).collect();
            let region = DifferentialRegion {
                extents: cfg.sample_extents(),
                times: region_times.clone(),
                per_axis: 0,
            };
            let tolerances = Tolerances {
                violation: cfg.tolerance("differential"),
                equality: None,
            };
            let diff = differential_harnack(&subject, &p.pair, &region, tolerances).map_err(verify_error)?;
            (report, diff, Vec::new())
        }
        VerifyMode::Kernel => {
            let kernel = cfg.kernel_spec()?;
            let subject = Subject::Kernel(&kernel);
            let report =
                harnack_scan_sampled(&subject, &p.pair, p.provider.as_ref(), &sampler, tol).map_err(verify_error)?;
            region_times = cfg.solver.snapshot_times.clone();
            let region = DifferentialRegion {
                extents: cfg.sample_extents(),
                times: region_times.clone(),
                per_axis: 8,
            };
            let diff = differential_harnack(&subject, &p.pair, &region, DifferentialRegion::KERNEL_TOLERANCES)
                .map_err(verify_error)?;
            (report, diff, locate_all(p)?)
        }
    };
    let sharp_tol = cfg.tolerance("sharpness");
    let sharp_pass = sharpness.iter().all(|pt| sharp_ok(pt, sharp_tol));
    let pass = report.pass && differential.verdict != Verdict::Violated && sharp_pass;

    let mut out = String::new();
    let _ = writeln!(out, "mode {:?}", cfg.mode);
    let _ = writeln!(out, "rate_pair {}", p.pair.label());
    let _ = writeln!(out, "seed {}", cfg.sampler.seed);
    let _ = writeln!(out, "quadruples {} skipped {}", report.quadruple_count, report.skipped);
    let _ = writeln!(out, "min_ratio {} tolerance {}", num(report.min_ratio), num(tol));
    let genuine = report.genuine_violations().count();
    let _ = writeln!(out, "violations {} genuine {}", report.violations.len(), genuine);
    for v in report.violations.iter().take(10) {
        let r = &v.record;
        let _ = writeln!(
            out,
            "  x {:?} y {:?} t {} s {} ratio {} genuine {:?}",
            r.x,
            r.y,
            num(r.t),
            num(r.s),
            num(r.ratio),
            v.genuine
        );
    }
    let _ = writeln!(
        out,
        "differential {} worst {}",
        differential.verdict,
        num(differential.worst_residual)
    );
    if !sharpness.is_empty() {
        let worst = sharpness.iter().map(|pt| (pt.ratio - 1.0).abs()).fold(0.0, f64::max);
        let rel = sharpness.iter().map(|pt| pt.relation_error).fold(0.0, f64::max);
        let _ = writeln!(
            out,
            "sharpness points {} max |ratio-1| {} max relation error {}",
            sharpness.len(),
            num(worst),
            num(rel)
        );
    }
    let _ = writeln!(out, "config_hash {}", cfg.hash());
    let _ = writeln!(out, "verdict {}", if pass { "pass" } else { "fail" });

    let body = VerifyOutput {
        config: cfg,
        config_hash: cfg.hash(),
        mode: cfg.mode,
        rate_pair: p.pair.label(),
        harnack: &report,
        differential: &differential,
        sharpness: &sharpness,
        pass,
    };
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    Ok(Outcome {
        pass,
        stdout: out,
        files: vec![
            ("report.json".into(), json(&body)),
            ("ratios.csv".into(), String::from_utf8(csv).expect("ascii csv")),
        ],
        numerical_failure: None,
    })
}

pub fn cmd_sharpness(p: &Prepared) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    let points = locate_all(p)?;
    let tol = cfg.tolerance("sharpness");
    let mut header = axis_names("x", cfg.dim);
    header.extend(["t", "s"].map(String::from));
    header.extend(axis_names("y_star", cfg.dim));
    header.extend(axis_names("expected", cfg.dim));
    header.extend(["ratio", "relation_error", "on_characteristic", "at_bound"].map(String::from));
    let mut csv = header.join(",") + "\n";
    for pt in &points {
        let mut line = cells(&pt.x);
        line.extend([num(pt.t), num(pt.s)]);
        line.extend(cells(&pt.y_star));
        line.extend(cells(&pt.expected));
        line.extend([
            num(pt.ratio),
            num(pt.relation_error),
            pt.on_characteristic.to_string(),
            pt.at_bound.to_string(),
        ]);
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    Ok(Outcome {
        pass: points.iter().all(|pt| sharp_ok(pt, tol)),
        stdout: csv.clone(),
        files: vec![("sharpness.csv".into(), csv)],
        numerical_failure: None,
    })
}

pub fn cmd_nested(p: &Prepared) -> Result<Outcome, CliError> {
    let cfg = &p.config;
    if p.drift.is_some() {
        return Err(CliError::Config("nested does not support a drift".into()));
    }
    let nested = cfg
        .nested
        .clone()
        .ok_or_else(|| CliError::Config("nested needs a `nested` section".into()))?;
    let (lo, hi) = cfg.extents[0];
    let setup = NestedSetup {
        potential: p.field.clone(),
        initial: cfg.solver.initial.clone(),
        half_widths: nested.half_widths.clone(),
        spacing: (hi - lo) / (cfg.solver.nx - 1) as f64,
        dt: cfg.solver.dt,
        snapshot_times: cfg.solver.snapshot_times.clone(),
        compare_radius: nested.compare_radius,
        scheme: cfg.solver.scheme,
    };
    let tol = cfg.tolerance("harnack");
    let probe = nested_domain_probe(&setup, &p.pair, p.provider.as_ref(), &cfg.sampler_config(), tol)
        .map_err(verify_error)?;
    let mut csv = "half_width,nx,min_ratio,skipped,sup_diff\n".to_string();
    for r in &probe.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            num(r.half_width),
            r.nx,
            num(r.min_ratio),
            r.skipped,
            r.sup_diff_from_previous.map_or("".into(), num)
        );
    }
    let pass = probe.stabilizing && probe.rows.iter().all(|r| r.min_ratio >= 1.0 - tol);
    let mut out = csv.clone();
    let _ = writeln!(out, "quadruples {}", probe.quadruple_count);
    let _ = writeln!(out, "stabilizing {}", probe.stabilizing);
    Ok(Outcome {
        pass,
        stdout: out,
        files: vec![("nested.csv".into(), csv)],
        numerical_failure: None,
    })
}
