use super::CliError;
use crate::action::{NumericOmega, OmegaProvider, SolveOptions, TimeWindow};
use crate::closedform::{drift_transform, HeatOmega, KernelSpec, QuadraticOmega, RatePair};
use crate::conditions::{comparison_select, ComparisonChoice, SampleSet};
use crate::expr::{PotentialExpr, ScalarField};
use crate::pde::{BoxGrid, InitialData, Scheme};
use crate::verify::SamplerConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatePairChoice {
    Heat,
    Quadratic { c: f64 },
    ComparisonAuto,
    /// `A = τ`, `β = τ^exponent`; used to demonstrate failing hypotheses.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaSource {
    ClosedHeat,
    ClosedQuadratic,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    #[default]
    Pde,
    Kernel,
}

/// Parameters of `C₁²|x − a|² + C₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticParams {
    pub c1: f64,
    #[serde(default)]
    pub c2: f64,
    #[serde(default)]
    pub a: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub nx: usize,
    pub dt: f64,
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub scheme: Scheme,
    pub initial: InitialData,
    /// Segments of discretised geodesics.
    #[serde(default = "default_geodesic_n")]
    pub geodesic_n: usize,
}

fn default_geodesic_n() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSettings {
    pub count: usize,
    pub seed: u64,
    pub time_range: (f64, f64),
    /// Sampling box; defaults to the domain box.
    #[serde(default)]
    pub extents: Option<Vec<(f64, f64)>>,
    /// Random samples for condition checks with numeric `ω`; closed forms
    /// use the default tensor grid.
    #[serde(default = "default_check_count")]
    pub check_count: usize,
}

fn default_check_count() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NestedConfig {
    pub half_widths: Vec<f64>,
    #[serde(default = "default_compare_radius")]
    pub compare_radius: f64,
}

fn default_compare_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessQuery {
    pub x: Vec<f64>,
    pub t: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: String,
    #[serde(default)]
    pub drift: Option<String>,
    pub dim: usize,
    #[serde(rename = "box")]
    pub extents: Vec<(f64, f64)>,
    pub rate_pair: RatePairChoice,
    pub omega_source: OmegaSource,
    /// Required by `closed_quadratic`; describes the effective potential.
    #[serde(default)]
    pub quadratic: Option<QuadraticParams>,
    pub solver: SolverConfig,
    pub sampler: SamplerSettings,
    /// Keys: `harnack`, `differential`, `sharpness`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub mode: VerifyMode,
    /// Closed-form subject for kernel mode; derived from `omega_source`
    /// when absent.
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub queries: Vec<Query>,
    #[serde(default)]
    pub sharpness_points: Vec<SharpnessQuery>,
    #[serde(default)]
    pub nested: Option<NestedConfig>,
}

pub const TOLERANCE_KEYS: [&str; 3] = ["harnack", "differential", "sharpness"];

/// Everything a command needs, parsed and cross-checked.
pub struct Prepared {
    pub config: RunConfig,
    pub potential: PotentialExpr,
    pub drift: Option<PotentialExpr>,
    /// `V`, or `|∇f|² − Δf + V` with a drift.
    pub effective: PotentialExpr,
    pub field: ScalarField,
    pub pair: RatePair,
    pub comparison: Option<ComparisonChoice>,
    pub provider: Box<dyn OmegaProvider>,
}

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let tol = |h: f64| BTreeMap::from([("harnack".to_string(), h)]);
        let gaussian = |dim: usize| InitialData::Gaussian {
            center: vec![0.0; dim],
            width: 1.0,
        };
        let solver = |nx, initial| SolverConfig {
            nx,
            dt: 1e-3,
            snapshot_times: vec![0.2, 0.5, 1.0],
            scheme: Scheme::CrankNicolson,
            initial,
            geodesic_n: 200,
        };
        let sampler = |count, range, extents| SamplerSettings {
            count,
            seed: 0,
            time_range: range,
            extents,
            check_count: 32,
        };
        let base = RunConfig {
            potential: "0".into(),
            drift: None,
            dim: 1,
            extents: vec![(-3.0, 3.0)],
            rate_pair: RatePairChoice::Heat,
            omega_source: OmegaSource::ClosedHeat,
            quadratic: None,
            solver: solver(241, gaussian(1)),
            sampler: sampler(2000, (0.1, 1.0), None),
            tolerances: tol(2e-3),
            mode: VerifyMode::Pde,
            kernel: None,
            queries: vec![Query {
                x: vec![1.0],
                y: vec![0.0],
                t: 1.0,
                s: 0.5,
            }],
            sharpness_points: Vec::new(),
            nested: None,
        };
        Ok(match name {
            "heat" => base,
            "quadratic" => RunConfig {
                potential: "x1^2".into(),
                extents: vec![(-8.0, 8.0)],
                rate_pair: RatePairChoice::Quadratic { c: 1.0 },
                omega_source: OmegaSource::ClosedQuadratic,
                quadratic: Some(QuadraticParams {
                    c1: 1.0,
                    c2: 0.0,
                    a: None,
                }),
                solver: solver(321, gaussian(1)),
                sampler: sampler(2000, (0.1, 1.0), Some(vec![(-3.0, 3.0)])),
                nested: Some(NestedConfig {
                    half_widths: vec![4.0, 6.0, 8.0],
                    compare_radius: 2.0,
                }),
                ..base
            },
            "sine" => RunConfig {
                potential: "sin(x1) + 2".into(),
                // cos vanishes on the walls, so ∇V·ν = 0 there.
                extents: vec![(-3.0 * FRAC_PI_2, 3.0 * FRAC_PI_2)],
                rate_pair: RatePairChoice::ComparisonAuto,
                omega_source: OmegaSource::Numeric,
                solver: solver(241, gaussian(1)),
                sampler: sampler(2000, (0.1, 1.0), Some(vec![(-3.0, 3.0)])),
                tolerances: tol(5e-3),
                ..base
            },
            "ou" => RunConfig {
                potential: "x1^2".into(),
                drift: Some("-0.5 * x1^2".into()),
                extents: vec![(-6.0, 6.0)],
                rate_pair: RatePairChoice::Quadratic { c: 2f64.sqrt() },
                omega_source: OmegaSource::ClosedQuadratic,
                quadratic: Some(QuadraticParams {
                    c1: 2f64.sqrt(),
                    c2: 1.0,
                    a: None,
                }),
                kernel: Some(KernelSpec::OuTransformed {
                    dim: 1,
                    c1: 1.0,
                    c2: 1.0,
                }),
                solver: solver(241, gaussian(1)),
                sampler: sampler(2000, (0.1, 1.0), Some(vec![(-3.0, 3.0)])),
                ..base
            },
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset {other:?} (heat, quadratic, sine, ou)"
                )))
            }
        })
    }

    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(match key {
            "harnack" => 2e-3,
            "differential" => 1e-3,
            _ => 1e-8,
        })
    }

    pub fn sample_extents(&self) -> Vec<(f64, f64)> {
        self.sampler.extents.clone().unwrap_or_else(|| self.extents.clone())
    }

    pub fn sampler_config(&self) -> SamplerConfig {
        SamplerConfig::new(
            self.sampler.count,
            self.sampler.seed,
            self.sample_extents(),
            self.sampler.time_range,
        )
    }

    pub fn grid(&self) -> Result<BoxGrid, CliError> {
        BoxGrid::new(
            self.extents.clone(),
            self.solver.nx,
            self.solver.dt,
            self.solver.snapshot_times.clone(),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            n: self.solver.geodesic_n,
            seed: self.sampler.seed,
            ..SolveOptions::default()
        }
    }

    pub fn quadratic_center(&self) -> Vec<f64> {
        self.quadratic
            .as_ref()
            .and_then(|q| q.a.clone())
            .unwrap_or_else(|| vec![0.0; self.dim])
    }

    /// Closed-form subject for kernel mode.
    pub fn kernel_spec(&self) -> Result<KernelSpec, CliError> {
        if let Some(k) = &self.kernel {
            return Ok(k.clone());
        }
        match (self.omega_source, &self.quadratic) {
            (OmegaSource::ClosedHeat, _) => Ok(KernelSpec::Heat { dim: self.dim }),
            (OmegaSource::ClosedQuadratic, Some(q)) => Ok(KernelSpec::Mehler {
                c1: q.c1,
                c2: q.c2,
                a: self.quadratic_center(),
            }),
            _ => Err(CliError::Config(
                "kernel mode needs `kernel` or a closed-form omega_source".into(),
            )),
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).unwrap_or_default();
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(1..=2).contains(&self.dim) {
            return bad(format!("dim must be 1 or 2, got {}", self.dim));
        }
        if self.extents.len() != self.dim || self.sample_extents().len() != self.dim {
            return bad(format!("box must have {} axes", self.dim));
        }
        if self.extents.iter().any(|(lo, hi)| !(hi > lo)) {
            return bad("box axes must satisfy lo < hi".into());
        }
        if let Some(k) = self.tolerances.keys().find(|k| !TOLERANCE_KEYS.contains(&k.as_str())) {
            return bad(format!("unknown tolerance key {k:?}"));
        }
        if let Some(q) = &self.quadratic {
            if q.a.as_ref().is_some_and(|a| a.len() != self.dim) {
                return bad("quadratic.a has the wrong dimension".into());
            }
        }
        if let RatePairChoice::Quadratic { c } = self.rate_pair {
            if !(c > 0.0) {
                return bad("rate_pair quadratic needs c > 0".into());
            }
        }
        for q in &self.queries {
            if q.x.len() != self.dim || q.y.len() != self.dim {
                return bad("query dimension mismatch".into());
            }
            if TimeWindow::new(q.t, q.s).is_err() {
                return bad(format!("query window needs 0 < s < t, got t = {}, s = {}", q.t, q.s));
            }
        }
        Ok(())
    }

    pub fn prepare(self) -> Result<Prepared, CliError> {
        self.validate()?;
        let parse = |src: &str| PotentialExpr::parse(src, self.dim).map_err(|e| CliError::Config(format!("{src:?}: {e}")));
        let potential = parse(&self.potential)?;
        let drift = self.drift.as_deref().map(parse).transpose()?;
        let effective = match &drift {
            Some(f) => drift_transform(f, &potential).map_err(|e| CliError::Config(e.to_string()))?,
            None => potential.clone(),
        };
        let field = effective.differentiate();
        self.check_closed_form(&field)?;
        let comparison = matches!(self.rate_pair, RatePairChoice::ComparisonAuto)
            .then(|| comparison_select(&field, &self.extents, 64));
        let pair = match (&self.rate_pair, &comparison) {
            (RatePairChoice::Heat, _) => RatePair::heat(self.dim),
            (RatePairChoice::Quadratic { c }, _) => RatePair::quadratic(self.dim, *c),
            (RatePairChoice::Power { exponent }, _) => RatePair::power(self.dim, *exponent),
            (RatePairChoice::ComparisonAuto, Some(choice)) => choice.pair,
            (RatePairChoice::ComparisonAuto, None) => unreachable!(),
        };
        let provider: Box<dyn OmegaProvider> = match self.omega_source {
            OmegaSource::ClosedHeat => Box::new(HeatOmega { dim: self.dim }),
            OmegaSource::ClosedQuadratic => {
                let q = self.quadratic.as_ref().expect("checked in check_closed_form");
                Box::new(QuadraticOmega {
                    c1: q.c1,
                    c2: q.c2,
                    a: self.quadratic_center(),
                })
            }
            OmegaSource::Numeric => {
                let size = self.extents.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
                let mut p = NumericOmega::new(field.clone(), size);
                p.opts = self.solve_options();
                Box::new(p)
            }
        };
        Ok(Prepared {
            config: self,
            potential,
            drift,
            effective,
            field,
            pair,
            comparison,
            provider,
        })
    }

    /// Closed forms are only valid for the potential they were derived for:
    /// compare on a tensor grid over the box.
    fn check_closed_form(&self, field: &ScalarField) -> Result<(), CliError> {
        let expected: Box<dyn Fn(&[f64]) -> f64> = match self.omega_source {
            OmegaSource::Numeric => return Ok(()),
            OmegaSource::ClosedHeat => Box::new(|_| 0.0),
            OmegaSource::ClosedQuadratic => {
                let Some(q) = self.quadratic.clone() else {
                    return Err(CliError::Config("closed_quadratic needs `quadratic` parameters".into()));
                };
                let a = self.quadratic_center();
                Box::new(move |x: &[f64]| {
                    q.c1 * q.c1 * x.iter().zip(&a).map(|(p, c)| (p - c) * (p - c)).sum::<f64>() + q.c2
                })
            }
        };
        for x in SampleSet::axis_grid(&self.extents, 7) {
            let (got, want) = (field.value(&x), expected(&x));
            if (got - want).abs() > 1e-9 * want.abs().max(1.0) {
                return Err(CliError::Config(format!(
                    "{:?} does not match the effective potential: {got} vs {want} at {x:?}",
                    self.omega_source
                )));
            }
        }
        Ok(())
    }
}
