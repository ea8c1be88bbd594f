use super::{Subject, VerifyError};
use crate::action::TimeWindow;
use crate::closedform::dist2;
use crate::conditions::Sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Grid points closer than this many cells to a wall are never sampled.
pub const INTERIOR_MARGIN_CELLS: f64 = 2.0;

/// Quadruples with `t − s < CLOSE_SPAN·t` and `|x − y| > FAR_REACH·R`
/// (`R` the box half-width) are dropped: there `e^{−ω}` is far below any
/// representable ratio and carries no information.
const CLOSE_SPAN: f64 = 0.05;
const FAR_REACH: f64 = 0.8;

fn default_margin() -> f64 {
    INTERIOR_MARGIN_CELLS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub count: usize,
    pub seed: u64,
    /// Box for both `x` and `y`.
    pub extents: Vec<(f64, f64)>,
    /// Kernels draw `s < t` uniformly from this range; grid solutions pair
    /// up the snapshot times inside it.
    pub time_range: (f64, f64),
    #[serde(default = "default_margin")]
    pub margin_cells: f64,
}

impl SamplerConfig {
    pub fn new(count: usize, seed: u64, extents: Vec<(f64, f64)>, time_range: (f64, f64)) -> Self {
        Self {
            count,
            seed,
            extents,
            time_range,
            margin_cells: INTERIOR_MARGIN_CELLS,
        }
    }
}

fn excluded(x: &[f64], y: &[f64], w: TimeWindow, radius: f64) -> bool {
    w.span() < CLOSE_SPAN * w.t && dist2(x, y).sqrt() > FAR_REACH * radius
}

fn half_width(extents: &[(f64, f64)]) -> f64 {
    extents.iter().map(|(lo, hi)| 0.5 * (hi - lo)).fold(0.0, f64::max)
}

/// Seeded quadruples for `subject`. Grid subjects are sampled at interior
/// nodes and snapshot times so no interpolation in space or time occurs.
pub fn sample_quadruples(subject: &Subject, cfg: &SamplerConfig) -> Result<Vec<Sample>, VerifyError> {
    if cfg.extents.len() != subject.dim() {
        return Err(VerifyError::Dimension {
            subject: subject.dim(),
            got: cfg.extents.len(),
        });
    }
    let (t_lo, t_hi) = cfg.time_range;
    if !(t_lo > 0.0 && t_hi > t_lo) {
        return Err(VerifyError::Sampler(format!("bad time range ({t_lo}, {t_hi})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let attempts = 1000 * cfg.count + 1000;
    let mut out = Vec::with_capacity(cfg.count);
    match subject {
        Subject::Kernel(_) => {
            let radius = half_width(&cfg.extents);
            let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                cfg.extents.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect()
            };
            for _ in 0..attempts {
                if out.len() == cfg.count {
                    break;
                }
                let x = point(&mut rng);
                let y = point(&mut rng);
                let a = rng.gen_range(t_lo..=t_hi);
                let b = rng.gen_range(t_lo..=t_hi);
                let Ok(window) = TimeWindow::new(a.max(b), a.min(b)) else {
                    continue;
                };
                if !excluded(&x, &y, window, radius) {
                    out.push(Sample { x, y, window });
                }
            }
        }
        Subject::Grid { solution, .. } => {
            let grid = &solution.grid;
            let radius = half_width(&grid.extents);
            let slack = 1e-12 * radius.max(1.0);
            let nodes: Vec<Vec<f64>> = (0..grid.node_count())
                .map(|k| grid.point(k))
                .filter(|p| grid.is_interior(p, cfg.margin_cells))
                .filter(|p| {
                    p.iter()
                        .zip(&cfg.extents)
                        .all(|(v, (lo, hi))| *v >= lo - slack && *v <= hi + slack)
                })
                .collect();
            if nodes.is_empty() {
                return Err(VerifyError::Sampler("no interior grid node inside the sampling box".into()));
            }
            let times: Vec<f64> = grid
                .snapshot_times
                .iter()
                .copied()
                .filter(|t| *t >= t_lo * (1.0 - 1e-12) && *t <= t_hi * (1.0 + 1e-12))
                .collect();
            let windows: Vec<TimeWindow> = times
                .iter()
                .flat_map(|&t| times.iter().filter_map(move |&s| TimeWindow::new(t, s).ok()))
                .collect();
            if windows.is_empty() {
                return Err(VerifyError::TooFewTimes);
            }
            for _ in 0..attempts {
                if out.len() == cfg.count {
                    break;
                }
                let window = windows[rng.gen_range(0..windows.len())];
                let x = nodes[rng.gen_range(0..nodes.len())].clone();
                let y = nodes[rng.gen_range(0..nodes.len())].clone();
                if !excluded(&x, &y, window, radius) {
                    out.push(Sample { x, y, window });
                }
            }
        }
    }
    if out.len() < cfg.count {
        return Err(VerifyError::Sampler(format!(
            "only {} of {} quadruples admissible",
            out.len(),
            cfg.count
        )));
    }
    Ok(out)
}
