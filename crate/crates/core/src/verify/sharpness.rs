use super::{log_ratio_at, Subject, VerifyError};
use crate::action::{OmegaProvider, TimeWindow};
use crate::closedform::{dist2, ln_sinh, norm2, KernelSpec, RatePair};
use crate::conditions::Sample;
use serde::{Deserialize, Serialize};

/// Golden-section search for `λ` in `[lo, hi]` along `y = a + λ·e`, where
/// `a` is the kernel centre and `e` the unit vector towards `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearch {
    pub lo: f64,
    pub hi: f64,
    /// Stop when the bracket is shorter than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            lo: -5.0,
            hi: 5.0,
            tol: 1e-11,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    pub x: Vec<f64>,
    pub t: f64,
    pub s: f64,
    pub y_star: Vec<f64>,
    /// Partner predicted by the characteristic relation.
    pub expected: Vec<f64>,
    pub ratio: f64,
    /// `|y* − expected|`
    pub relation_error: f64,
    pub on_characteristic: bool,
    pub at_bound: bool,
}

const RELATION_TOL: f64 = 1e-6;

fn center(kernel: &KernelSpec) -> Vec<f64> {
    match kernel {
        KernelSpec::Mehler { a, .. } => a.clone(),
        _ => vec![0.0; kernel.dim()],
    }
}

/// The `y` with equality for given `(x, t, s)`: `y = (s/t)x` for the heat
/// kernel, `sinh(2Cs)(x − a) = sinh(2Ct)(y − a)` for Mehler-type kernels.
pub fn equality_partner(kernel: &KernelSpec, x: &[f64], window: TimeWindow) -> Vec<f64> {
    let a = center(kernel);
    let scale = match kernel {
        KernelSpec::Heat { .. } => window.s / window.t,
        KernelSpec::Mehler { c1, .. } => sinh_ratio(c1.abs(), window),
        KernelSpec::OuTransformed { c1, c2, .. } => sinh_ratio(c1.hypot(*c2), window),
    };
    x.iter().zip(&a).map(|(xi, ai)| ai + scale * (xi - ai)).collect()
}

fn sinh_ratio(c: f64, w: TimeWindow) -> f64 {
    (ln_sinh(2.0 * c * w.s) - ln_sinh(2.0 * c * w.t)).exp()
}

/// Minimise the ratio over `y` on the line through the kernel centre in the
/// direction of `x` (any axis when `x` is the centre). The minimiser is
/// compared against [`equality_partner`] but equality points off the
/// characteristic set are reported, not rejected.
pub fn sharpness_locate(
    kernel: &KernelSpec,
    pair: &RatePair,
    provider: &dyn OmegaProvider,
    x: &[f64],
    window: TimeWindow,
    search: &LineSearch,
) -> Result<SharpnessPoint, VerifyError> {
    let subject = Subject::Kernel(kernel);
    let a = center(kernel);
    let offset: Vec<f64> = x.iter().zip(&a).map(|(p, q)| p - q).collect();
    let len = norm2(&offset).sqrt();
    let dir: Vec<f64> = if len > 0.0 {
        offset.iter().map(|v| v / len).collect()
    } else {
        (0..x.len()).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()
    };
    let at = |lambda: f64| -> Vec<f64> { a.iter().zip(&dir).map(|(p, e)| p + lambda * e).collect() };
    let objective = |lambda: f64| -> Result<f64, VerifyError> {
        let sample = Sample {
            x: x.to_vec(),
            y: at(lambda),
            window,
        };
        Ok(log_ratio_at(&subject, pair, provider, &sample)?.unwrap_or(f64::INFINITY))
    };

    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (search.lo, search.hi);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    for _ in 0..search.max_iter {
        if hi - lo <= search.tol {
            break;
        }
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = objective(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = objective(d)?;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let y_star = at(lambda);
    let ratio = objective(lambda)?.exp();
    let expected = equality_partner(kernel, x, window);
    let relation_error = dist2(&y_star, &expected).sqrt();
    let edge = 1e-6 * (search.hi - search.lo);
    Ok(SharpnessPoint {
        x: x.to_vec(),
        t: window.t,
        s: window.s,
        y_star,
        expected,
        ratio,
        relation_error,
        on_characteristic: relation_error <= RELATION_TOL,
        at_bound: lambda - search.lo <= edge || search.hi - lambda <= edge,
    })
}
