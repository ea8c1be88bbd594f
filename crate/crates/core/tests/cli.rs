use harnack_lab::cli::{RunConfig, SEED_ENV};
use harnack_lab::pde::{InitialData, Scheme};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_harnack-lab"));
    c.env_remove(SEED_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, cfg: &RunConfig) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn omega_for_quadratic_preset() {
    let o = run(&["omega", "--preset", "quadratic", "--x", "1", "--y", "0", "--t", "1", "--s", "0.5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("x,y,t,s,omega,residual,method"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let omega: f64 = row[4].parse().unwrap();
    assert!((omega - 0.656518).abs() < 1e-6);
    assert_eq!(row[6], "closed_quadratic");
}

#[test]
fn numeric_omega_agrees_with_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset("quadratic").unwrap();
    cfg.omega_source = harnack_lab::cli::OmegaSource::Numeric;
    let path = write_config(dir.path(), &cfg);
    let o = run(&["omega", "--config", &path, "--x", "1", "--y", "0", "--t", "1", "--s", "0.5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let omega: f64 = row[4].parse().unwrap();
    assert!((omega - 0.656518).abs() < 1e-5);
    assert_eq!(row[6], "direct");
}

#[test]
fn geodesic_rows_cover_the_path() {
    let o = run(&["geodesic", "--preset", "sine", "--x", "1", "--y", "-1", "--t", "1", "--s", "0.5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("query,i,time,x\n"));
    assert_eq!(out.lines().filter(|l| l.starts_with("0,")).count(), 201);
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["verify", "--preset", "nope"])), 2);
    assert_eq!(code(&run(&["verify"])), 2);
    assert_eq!(code(&run(&["omega", "--preset", "heat", "--x", "1", "--y", "0", "--t", "1", "--s", "2"])), 2);
    assert_eq!(code(&run(&["omega", "--preset", "heat", "--potential", "x1^"])), 2);
    assert_eq!(code(&run(&["nested", "--preset", "ou"])), 2);

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"potential": "x1^2", "bogus": 1}"#).unwrap();
    assert_eq!(code(&run(&["check", "--config", p.to_str().unwrap()])), 2);
}

#[test]
fn non_positive_solution_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::preset("heat").unwrap();
    cfg.extents = vec![(-1.0, 1.0)];
    cfg.solver.nx = 201;
    cfg.solver.dt = 0.1;
    cfg.solver.snapshot_times = vec![0.2];
    cfg.solver.scheme = Scheme::CrankNicolson;
    cfg.solver.initial = InitialData::Expression {
        source: "1e-3 + exp(-x1^2 / 0.0002)".into(),
    };
    let path = write_config(dir.path(), &cfg);
    let o = run(&["solve", "--config", &path]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn wrong_beta_fails_verification() {
    let o = run(&["verify", "--preset", "heat", "--beta-exponent", "0.25"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("verdict fail"));
    let ok = run(&["verify", "--preset", "heat"]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("verdict pass"));
}

#[test]
fn verify_outputs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = |d: &Path| {
        vec![
            "verify".to_string(),
            "--preset".into(),
            "quadratic".into(),
            "--count".into(),
            "300".into(),
            "--out".into(),
            d.to_str().unwrap().into(),
        ]
    };
    let oa = bin().args(args(a.path())).output().unwrap();
    let ob = bin().args(args(b.path())).arg("--jobs").arg("1").output().unwrap();
    assert_eq!(code(&oa), 0);
    assert_eq!(oa.stdout, ob.stdout);
    for f in ["report.json", "ratios.csv"] {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        assert_eq!(x, y, "{f}");
    }
    let csv = std::fs::read_to_string(a.path().join("ratios.csv")).unwrap();
    assert!(csv.starts_with("x,y,t,s,ratio\n"));
    assert_eq!(csv.lines().count(), 301);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["config"]["sampler"]["count"], 300);
}

#[test]
fn seed_precedence() {
    let hash = |o: &Output| {
        stdout(o)
            .lines()
            .find(|l| l.starts_with("config_hash"))
            .unwrap()
            .to_string()
    };
    let base = ["verify", "--preset", "heat", "--mode", "kernel", "--count", "50"];
    let default = run(&base);
    let env = bin().args(base).env(SEED_ENV, "5").output().unwrap();
    let flag = bin().args(base).args(["--seed", "5"]).output().unwrap();
    let both = bin().args(base).args(["--seed", "5"]).env(SEED_ENV, "9").output().unwrap();
    assert_ne!(hash(&default), hash(&env));
    assert_eq!(hash(&env), hash(&flag));
    assert_eq!(hash(&flag), hash(&both));
    assert!(stdout(&both).contains("seed 5"));
    let bad = bin().args(base).env(SEED_ENV, "five").output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn check_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "--preset", "heat", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("equality in every equality-type condition"));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("check.json")).unwrap()).unwrap();
    let ids: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["condition_id"].as_str().unwrap())
        .collect();
    assert!(ids.contains(&"first_order_x") && ids.contains(&"second_order") && ids.contains(&"beta_zero_limit"));
}

#[test]
fn solve_sharpness_and_nested() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = run(&["solve", "--preset", "quadratic", "--out", d]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,x1,u\n"));

    let o = run(&["sharpness", "--preset", "quadratic"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",true,false")));

    let o = run(&["nested", "--preset", "quadratic"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("stabilizing true"));
}
