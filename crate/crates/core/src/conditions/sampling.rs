use crate::action::TimeWindow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub window: TimeWindow,
}

/// Quadruples `(x, y, t, s)` at which conditions are evaluated.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
}

/// Windows closer than this fraction of `t` are left to the limit checks.
pub const MIN_SPAN_FRACTION: f64 = 5e-2;

pub const DEFAULT_TIMES: [f64; 4] = [0.2, 0.5, 1.0, 2.0];
pub const DEFAULT_S_FRACTIONS: [f64; 3] = [0.25, 0.5, 0.75];

impl SampleSet {
    /// Tensor grid of `per_axis` points per axis on `extents`, endpoints
    /// included.
    pub fn axis_grid(extents: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(1);
        let d = extents.len();
        let total = per_axis.pow(d as u32);
        (0..total)
            .map(|flat| {
                let mut rem = flat;
                extents
                    .iter()
                    .map(|&(lo, hi)| {
                        let i = rem % per_axis;
                        rem /= per_axis;
                        if per_axis == 1 {
                            0.5 * (lo + hi)
                        } else {
                            lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn windows(times: &[f64], s_fractions: &[f64]) -> Vec<TimeWindow> {
        times
            .iter()
            .flat_map(|&t| s_fractions.iter().map(move |&f| (t, t * f)))
            .filter(|&(t, s)| t - s >= MIN_SPAN_FRACTION * t)
            .filter_map(|(t, s)| TimeWindow::new(t, s).ok())
            .collect()
    }

    /// Every `x` and `y` from the tensor grid crossed with every window.
    pub fn tensor(extents: &[(f64, f64)], per_axis: usize, times: &[f64], s_fractions: &[f64]) -> Self {
        let pts = Self::axis_grid(extents, per_axis);
        let windows = Self::windows(times, s_fractions);
        let mut samples = Vec::with_capacity(pts.len() * pts.len() * windows.len());
        for w in &windows {
            for x in &pts {
                for y in &pts {
                    samples.push(Sample {
                        x: x.clone(),
                        y: y.clone(),
                        window: *w,
                    });
                }
            }
        }
        Self { samples }
    }

    /// 8 points per axis, `t ∈ {0.2, 0.5, 1, 2}`, `s = t·{0.25, 0.5, 0.75}`.
    pub fn default_grid(extents: &[(f64, f64)]) -> Self {
        Self::tensor(extents, 8, &DEFAULT_TIMES, &DEFAULT_S_FRACTIONS)
    }

    /// `count` seeded uniform `(x, y)` pairs, windows drawn from the
    /// default time set.
    pub fn random(extents: &[(f64, f64)], count: usize, seed: u64) -> Self {
        let windows = Self::windows(&DEFAULT_TIMES, &DEFAULT_S_FRACTIONS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> { extents.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect() };
        let samples = (0..count)
            .map(|_| {
                let x = point(&mut rng);
                let y = point(&mut rng);
                let window = windows[rng.gen_range(0..windows.len())];
                Sample { x, y, window }
            })
            .collect();
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
