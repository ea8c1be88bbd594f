use super::{PdeError, Scheme};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Uniform tensor grid on a box with `nx` nodes per axis (walls included).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub extents: Vec<(f64, f64)>,
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
}

impl BoxGrid {
    /// Snapshot times are sorted and deduplicated; `t_end` is the last one.
    pub fn new(extents: Vec<(f64, f64)>, nx: usize, dt: f64, mut snapshot_times: Vec<f64>) -> Result<Self, PdeError> {
        let d = extents.len();
        if !(1..=2).contains(&d) {
            return Err(PdeError::InvalidGrid(format!("dimension {d} not in {{1, 2}}")));
        }
        if nx < 16 {
            return Err(PdeError::InvalidGrid(format!("nx = {nx} < 16")));
        }
        if !(dt > 0.0) {
            return Err(PdeError::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        if extents.iter().any(|&(lo, hi)| !(hi > lo)) {
            return Err(PdeError::InvalidGrid("empty axis".into()));
        }
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();
        if snapshot_times.is_empty() || !(snapshot_times[0] > 0.0) {
            return Err(PdeError::InvalidGrid("snapshot times must be positive and non-empty".into()));
        }
        let t_end = *snapshot_times.last().unwrap();
        Ok(Self {
            extents,
            nx,
            dt,
            t_end,
            snapshot_times,
        })
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let (lo, hi) = self.extents[axis];
        (hi - lo) / (self.nx - 1) as f64
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.extents[axis].0 + self.spacing(axis) * i as f64
    }

    pub fn node_count(&self) -> usize {
        self.nx.pow(self.dim() as u32)
    }

    /// Node coordinates for flat index `k = i + nx·j`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        let mut rem = k;
        (0..self.dim())
            .map(|a| {
                let i = rem % self.nx;
                rem /= self.nx;
                self.coord(a, i)
            })
            .collect()
    }

    pub fn map_nodes(&self, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
        (0..self.node_count()).map(|k| f(&self.point(k))).collect()
    }

    /// Same box and times with `factor` times finer spacing and step.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            nx: (self.nx - 1) * factor + 1,
            dt: self.dt / factor as f64,
            ..self.clone()
        }
    }

    /// Whether `x` lies at least `cells` grid cells inside every wall.
    pub fn is_interior(&self, x: &[f64], cells: f64) -> bool {
        x.iter().enumerate().all(|(a, &v)| {
            let (lo, hi) = self.extents[a];
            let m = cells * self.spacing(a);
            v >= lo + m && v <= hi - m
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub grid: BoxGrid,
    pub initial: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub min_value: f64,
    pub scheme: Scheme,
}

impl GridSolution {
    pub fn snapshot(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.max(1.0))
    }

    /// Linear (1D) or bilinear (2D) interpolation inside the box.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let locate = |a: usize| {
            let (lo, _) = g.extents[a];
            let r = ((x[a] - lo) / g.spacing(a)).clamp(0.0, (nx - 1) as f64);
            let i = (r.floor() as usize).min(nx - 2);
            (i, r - i as f64)
        };
        match g.dim() {
            1 => {
                let (i, w) = locate(0);
                (1.0 - w) * values[i] + w * values[i + 1]
            }
            _ => {
                let (i, wx) = locate(0);
                let (j, wy) = locate(1);
                let at = |i: usize, j: usize| values[i + nx * j];
                (1.0 - wx) * (1.0 - wy) * at(i, j)
                    + wx * (1.0 - wy) * at(i + 1, j)
                    + (1.0 - wx) * wy * at(i, j + 1)
                    + wx * wy * at(i + 1, j + 1)
            }
        }
    }

    pub fn value_at(&self, t: f64, x: &[f64]) -> Option<f64> {
        self.snapshot(t).map(|s| self.interpolate(&s.values, x))
    }

    /// `Δ log u` by central differences at node `k`; `None` on a wall node.
    pub fn log_laplacian_at(&self, values: &[f64], k: usize) -> Option<f64> {
        let g = &self.grid;
        let nx = g.nx;
        let mut total = 0.0;
        let mut rem = k;
        let mut stride = 1;
        for a in 0..g.dim() {
            let i = rem % nx;
            rem /= nx;
            if i == 0 || i == nx - 1 {
                return None;
            }
            let h = g.spacing(a);
            let (l, c, r) = (values[k - stride].ln(), values[k].ln(), values[k + stride].ln());
            total += (l - 2.0 * c + r) / (h * h);
            stride *= nx;
        }
        Some(total)
    }

    /// Largest one-sided second-order normal derivative over wall nodes and
    /// snapshots, relative to `max |u|`.
    pub fn max_boundary_flux(&self) -> f64 {
        let g = &self.grid;
        let nx = g.nx;
        let mut worst = 0.0_f64;
        for s in &self.snapshots {
            let norm = s.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for k in 0..g.node_count() {
                let mut rem = k;
                let mut stride = 1;
                for a in 0..g.dim() {
                    let i = rem % nx;
                    rem /= nx;
                    let h = g.spacing(a);
                    let u = |off: isize| s.values[(k as isize + off * stride as isize) as usize];
                    let flux = if i == 0 {
                        (-3.0 * u(0) + 4.0 * u(1) - u(2)) / (2.0 * h)
                    } else if i == nx - 1 {
                        (3.0 * u(0) - 4.0 * u(-1) + u(-2)) / (2.0 * h)
                    } else {
                        0.0
                    };
                    worst = worst.max(flux.abs() / norm);
                    stride *= nx;
                }
            }
        }
        worst
    }

    /// CSV with header `t,x1[,x2],u`, one row per node per snapshot.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        let d = self.grid.dim();
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=d).map(|i| format!("x{i}")))
            .chain(std::iter::once("u".into()))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for s in &self.snapshots {
            for (k, v) in s.values.iter().enumerate() {
                let p = self.grid.point(k);
                write!(out, "{:.16e}", s.t)?;
                for c in p {
                    write!(out, ",{c:.16e}")?;
                }
                writeln!(out, ",{v:.16e}")?;
            }
        }
        Ok(())
    }
}
