//! Direct evaluation of the Harnack inequality
//! `u(x,t) ≥ u(y,s)·β(s)/β(t)·e^{f(x)−f(y)}·e^{−ω(x,y;t,s)}` on concrete
//! positive solutions, either closed-form kernels or grid solutions.
//!
//! Everything is computed in log space; a ratio is `u(x,t)/rhs`.

mod differential;
mod nested;
mod sampler;
mod sharpness;

pub use differential::{differential_harnack, DifferentialRegion};
pub use nested::{nested_domain_probe, NestedProbe, NestedRow, NestedSetup};
pub use sampler::{sample_quadruples, SamplerConfig, INTERIOR_MARGIN_CELLS};
pub use sharpness::{equality_partner, sharpness_locate, LineSearch, SharpnessPoint};

use crate::action::OmegaProvider;
use crate::closedform::{log_harnack_rhs, ClosedFormError, DriftFactor, KernelSpec, RatePair};
use crate::conditions::Sample;
use crate::expr::PotentialExpr;
use crate::pde::{GridSolution, PdeError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),
    #[error("dimension mismatch: subject has d = {subject}, got {got}")]
    Dimension { subject: usize, got: usize },
    #[error("need two distinct snapshot times inside the sampling range")]
    TooFewTimes,
    #[error("sampler: {0}")]
    Sampler(String),
    #[error(transparent)]
    ClosedForm(#[from] ClosedFormError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

/// The positive solution under test.
#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Kernel(&'a KernelSpec),
    /// A grid solution; with `drift` set it is read as a solution of the
    /// drift equation and the bound gains `e^{f(x)−f(y)}`.
    Grid {
        solution: &'a GridSolution,
        drift: Option<&'a PotentialExpr>,
    },
}

impl<'a> Subject<'a> {
    pub fn grid(solution: &'a GridSolution) -> Self {
        Subject::Grid { solution, drift: None }
    }

    pub fn dim(&self) -> usize {
        match self {
            Subject::Kernel(k) => k.dim(),
            Subject::Grid { solution, .. } => solution.grid.dim(),
        }
    }

    pub fn log_u(&self, x: &[f64], t: f64) -> Result<f64, VerifyError> {
        if x.len() != self.dim() {
            return Err(VerifyError::Dimension {
                subject: self.dim(),
                got: x.len(),
            });
        }
        match self {
            Subject::Kernel(k) => Ok(k.log_value(x, t)?),
            Subject::Grid { solution, .. } => solution
                .value_at(t, x)
                .map(f64::ln)
                .ok_or(VerifyError::MissingSnapshot(t)),
        }
    }

    fn drift_factor(&self, x: &[f64], y: &[f64]) -> Option<DriftFactor> {
        match self {
            Subject::Kernel(k @ KernelSpec::OuTransformed { .. }) => Some(DriftFactor {
                f_x: k.drift(x),
                f_y: k.drift(y),
            }),
            Subject::Kernel(_) => None,
            Subject::Grid { drift, .. } => drift.map(|f| DriftFactor {
                f_x: f.eval(x),
                f_y: f.eval(y),
            }),
        }
    }

    fn fingerprint(&self, hasher: &mut Sha256) {
        match self {
            Subject::Kernel(k) => {
                hasher.update(b"kernel");
                hasher.update(serde_json::to_vec(k).unwrap_or_default());
            }
            Subject::Grid { solution, drift } => {
                hasher.update(b"grid");
                hasher.update(serde_json::to_vec(&solution.grid).unwrap_or_default());
                hasher.update(serde_json::to_vec(&solution.scheme).unwrap_or_default());
                for s in &solution.snapshots {
                    hasher.update(s.t.to_le_bytes());
                    for v in &s.values {
                        hasher.update(v.to_le_bytes());
                    }
                }
                if let Some(f) = drift {
                    hasher.update(f.to_string().as_bytes());
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub s: f64,
    pub ratio: f64,
}

impl RatioRecord {
    pub fn sample(&self) -> Sample {
        Sample {
            x: self.x.clone(),
            y: self.y.clone(),
            window: crate::action::TimeWindow { t: self.t, s: self.s },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(flatten)]
    pub record: RatioRecord,
    /// Whether the violation persists at twice the grid resolution; `None`
    /// until triaged.
    pub genuine: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessEntry {
    #[serde(flatten)]
    pub record: RatioRecord,
    /// `|ratio − 1|`
    pub deviation: f64,
}

/// Number of closest-to-equality quadruples kept in a report.
pub const SHARPNESS_KEEP: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub quadruple_count: usize,
    /// Quadruples dropped because `ω` could not be computed.
    pub skipped: usize,
    pub tolerance: f64,
    pub min_ratio: f64,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub sharpness: Vec<SharpnessEntry>,
    pub config_hash: String,
    /// Every evaluated quadruple, in sample order. Exported as CSV only.
    #[serde(skip)]
    pub records: Vec<RatioRecord>,
}

impl HarnackReport {
    pub fn genuine_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.genuine != Some(false))
    }

    /// Flat table `x,y,t,s,ratio` (`x1,x2,y1,y2,t,s,ratio` in 2D).
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let d = self.records.first().map_or(1, |r| r.x.len());
        let header = if d == 1 {
            "x,y,t,s,ratio".to_string()
        } else {
            let xs: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            let ys: Vec<String> = (1..=d).map(|i| format!("y{i}")).collect();
            format!("{},{},t,s,ratio", xs.join(","), ys.join(","))
        };
        writeln!(out, "{header}")?;
        for r in &self.records {
            let cells: Vec<String> = r
                .x
                .iter()
                .chain(&r.y)
                .chain([r.t, r.s, r.ratio].iter())
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// `log(u(x,t)/rhs)` at one quadruple; `Ok(None)` when `ω` is unavailable.
pub fn log_ratio_at(
    subject: &Subject,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    sample: &Sample,
) -> Result<Option<f64>, VerifyError> {
    let w = sample.window;
    let lu_x = subject.log_u(&sample.x, w.t)?;
    let lu_y = subject.log_u(&sample.y, w.s)?;
    let Ok(omega) = provider.omega(&sample.x, &sample.y, w) else {
        return Ok(None);
    };
    let drift = subject.drift_factor(&sample.x, &sample.y);
    Ok(Some(lu_x - log_harnack_rhs(lu_y, pair, w, omega, drift)))
}

/// Evaluate the ratio at every sample. Samples are processed in parallel
/// and aggregated in input order.
pub fn harnack_scan(
    subject: &Subject,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    samples: &[Sample],
    tolerance: f64,
) -> Result<HarnackReport, VerifyError> {
    let outcomes = samples
        .par_iter()
        .map(|s| log_ratio_at(subject, pair, provider, s))
        .collect::<Result<Vec<_>, _>>()?;

    let mut hasher = Sha256::new();
    hasher.update(b"harnack_scan/1");
    subject.fingerprint(&mut hasher);
    hasher.update(serde_json::to_vec(pair).unwrap_or_default());
    hasher.update(provider.label().as_bytes());
    hasher.update(tolerance.to_le_bytes());
    for s in samples {
        for v in s.x.iter().chain(&s.y).chain([s.window.t, s.window.s].iter()) {
            hasher.update(v.to_le_bytes());
        }
    }
    let config_hash = hex(&hasher.finalize());

    let mut records = Vec::with_capacity(samples.len());
    let mut skipped = 0;
    let mut min_log = f64::INFINITY;
    for (s, o) in samples.iter().zip(outcomes) {
        match o {
            Some(lr) => {
                min_log = min_log.min(lr);
                records.push(RatioRecord {
                    x: s.x.clone(),
                    y: s.y.clone(),
                    t: s.window.t,
                    s: s.window.s,
                    ratio: lr.exp(),
                });
            }
            None => skipped += 1,
        }
    }
    let threshold = 1.0 - tolerance;
    let violations = records
        .iter()
        .filter(|r| r.ratio < threshold)
        .map(|r| Violation {
            record: r.clone(),
            genuine: None,
        })
        .collect();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let da = (records[a].ratio - 1.0).abs();
        let db = (records[b].ratio - 1.0).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    let sharpness = order
        .into_iter()
        .take(SHARPNESS_KEEP)
        .map(|i| SharpnessEntry {
            record: records[i].clone(),
            deviation: (records[i].ratio - 1.0).abs(),
        })
        .collect();
    let min_ratio = if records.is_empty() { f64::NAN } else { min_log.exp() };
    Ok(HarnackReport {
        quadruple_count: records.len(),
        skipped,
        tolerance,
        min_ratio,
        pass: !records.is_empty() && min_ratio >= threshold,
        violations,
        sharpness,
        config_hash,
        records,
    })
}

/// Draw quadruples with [`sample_quadruples`] and scan them.
pub fn harnack_scan_sampled(
    subject: &Subject,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    sampler: &SamplerConfig,
    tolerance: f64,
) -> Result<HarnackReport, VerifyError> {
    let samples = sample_quadruples(subject, sampler)?;
    harnack_scan(subject, pair, provider, &samples, tolerance)
}

/// Re-evaluate every violation on `refined` (the same problem at twice the
/// resolution) and mark whether it persists.
pub fn triage(
    report: &mut HarnackReport,
    refined: &Subject,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
) -> Result<(), VerifyError> {
    let threshold = 1.0 - report.tolerance;
    let verdicts = report
        .violations
        .par_iter()
        .map(|v| log_ratio_at(refined, pair, provider, &v.record.sample()))
        .collect::<Result<Vec<_>, _>>()?;
    for (v, lr) in report.violations.iter_mut().zip(verdicts) {
        v.genuine = lr.map(|lr| lr.exp() < threshold);
    }
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
