//! Command-line front end. Each subcommand loads a [`RunConfig`] (from a
//! JSON file or a built-in preset), applies flag and environment overrides
//! and composes the library modules into one experiment.
//!
//! Exit codes: 0 success, 1 a check or verdict failed, 2 bad input,
//! 3 numerical failure.

mod commands;
mod config;

pub use commands::{execute, Outcome};
pub use config::{
    NestedConfig, OmegaSource, Prepared, QuadraticParams, Query, RatePairChoice, RunConfig, SamplerSettings,
    SharpnessQuery, SolverConfig, VerifyMode,
};

use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

pub const SEED_ENV: &str = "HARNACK_LAB_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "harnack-lab", version, about = "Agmon metrics, Neumann heat solves and Harnack inequality checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in configuration: heat, quadratic, sine or ou.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of sampled quadruples.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub potential: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Harnack ratio tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Replace the rate pair by `A = τ`, `β = τ^e`.
    #[arg(long = "beta-exponent", global = true)]
    pub beta_exponent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pde,
    Kernel,
}

#[derive(Debug, Clone, clap::Args)]
pub struct QueryArgs {
    /// Comma-separated coordinates of x.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Tabulate ω at the configured (or given) quadruples.
    Omega(QueryArgs),
    /// Print minimising paths.
    Geodesic(QueryArgs),
    /// Solve the Neumann problem and export snapshots.
    Solve,
    /// Certify the hypotheses of the Harnack estimate.
    Check,
    /// Scan the Harnack inequality on a solution or kernel.
    Verify,
    /// Locate equality points of a closed-form kernel.
    Sharpness,
    /// Compare solutions on nested boxes.
    Nested,
}

impl Cli {
    /// Config file or preset, then `HARNACK_LAB_SEED`, then flags.
    pub fn load_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => return Err(CliError::Config("use either --config or --preset".into())),
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            (None, Some(name)) => RunConfig::preset(name)?,
            (None, None) => return Err(CliError::Config("need --config FILE or --preset NAME".into())),
        };
        if let Ok(v) = std::env::var(SEED_ENV) {
            cfg.sampler.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not an integer")))?;
        }
        if let Some(seed) = self.seed {
            cfg.sampler.seed = seed;
        }
        if let Some(c) = self.count {
            cfg.sampler.count = c;
        }
        if let Some(nx) = self.nx {
            cfg.solver.nx = nx;
        }
        if let Some(dt) = self.dt {
            cfg.solver.dt = dt;
        }
        if let Some(p) = &self.potential {
            cfg.potential = p.clone();
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Pde => VerifyMode::Pde,
                ModeArg::Kernel => VerifyMode::Kernel,
            };
        }
        if let Some(t) = self.tol {
            cfg.tolerances.insert("harnack".into(), t);
        }
        if let Some(e) = self.beta_exponent {
            cfg.rate_pair = RatePairChoice::Power { exponent: e };
        }
        Ok(cfg)
    }
}

/// Parse `args`, run, print and write outputs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(j) = cli.jobs {
        // Only the first call in a process can size the global pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    match execute(&cli) {
        Ok(outcome) => match emit(&cli, &outcome) {
            Ok(()) => match &outcome.numerical_failure {
                Some(msg) => {
                    eprintln!("error: numerical failure: {msg}");
                    3
                }
                None => i32::from(!outcome.pass),
            },
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(outcome.stdout.as_bytes())?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &outcome.files {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}
