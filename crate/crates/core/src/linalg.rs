//! Small direct solvers: tridiagonal (Thomas), banded SPD Cholesky and a
//! dense partial-pivoting solve for the tiny `d×d` systems of shooting.

/// Solve `A x = rhs` in place for tridiagonal `A` with sub-diagonal `lower`
/// (`lower[0]` unused), `diag` and super-diagonal `upper` (`upper[n-1]` unused).
///
/// Returns `false` on a zero pivot. No pivoting, so intended for diagonally
/// dominant or SPD systems.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> bool {
    let n = rhs.len();
    assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return true;
    }
    let mut c = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return false;
    }
    rhs[0] /= beta;
    for i in 1..n {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        if beta == 0.0 || !beta.is_finite() {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i + 1] * rhs[i + 1];
    }
    true
}

/// Pre-factored tridiagonal system, reused across time steps.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    // modified super-diagonal and inverse pivots
    c: Vec<f64>,
    inv_beta: Vec<f64>,
}

impl TridiagonalLu {
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut c = vec![0.0; n];
        let mut inv_beta = vec![0.0; n];
        let mut beta = diag[0];
        if beta == 0.0 || !beta.is_finite() {
            return None;
        }
        inv_beta[0] = 1.0 / beta;
        for i in 1..n {
            c[i] = upper[i - 1] * inv_beta[i - 1];
            beta = diag[i] - lower[i] * c[i];
            if beta == 0.0 || !beta.is_finite() {
                return None;
            }
            inv_beta[i] = 1.0 / beta;
        }
        Some(Self {
            lower: lower.to_vec(),
            c,
            inv_beta,
        })
    }

    pub fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_beta[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.c[i + 1] * rhs[i + 1];
        }
    }

    /// Solve a strided line `data[start + k*stride]`, `k < n`.
    pub fn solve_strided(&self, data: &mut [f64], start: usize, stride: usize) {
        let n = self.inv_beta.len();
        let at = |k: usize| start + k * stride;
        data[at(0)] *= self.inv_beta[0];
        for i in 1..n {
            data[at(i)] = (data[at(i)] - self.lower[i] * data[at(i - 1)]) * self.inv_beta[i];
        }
        for i in (0..n - 1).rev() {
            data[at(i)] -= self.c[i + 1] * data[at(i + 1)];
        }
    }
}

/// Symmetric banded matrix with half-bandwidth `b`, lower band stored row-wise.
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    b: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, b: usize) -> Self {
        Self {
            n,
            b,
            data: vec![0.0; n * (b + 1)],
        }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.b);
        i * (self.b + 1) + self.b - (i - j)
    }

    /// Add to entry `(i, j)` with `j ≤ i`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.b {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.b);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place Cholesky `A = L Lᵀ`. Returns `None` if `A` is not positive definite.
    pub fn cholesky(mut self) -> Option<BandedCholesky> {
        let (n, b) = (self.n, self.b);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            for j in lo..=i {
                let mut sum = self.data[self.idx(i, j)];
                let klo = lo.max(j.saturating_sub(b));
                for k in klo..j {
                    sum -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return None;
                    }
                    let k = self.idx(i, i);
                    self.data[k] = sum.sqrt();
                } else {
                    let k = self.idx(i, j);
                    self.data[k] = sum / self.data[self.idx(j, j)];
                }
            }
        }
        Some(BandedCholesky { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    factor: SymBanded,
}

impl BandedCholesky {
    pub fn solve(&self, rhs: &mut [f64]) {
        let f = &self.factor;
        let (n, b) = (f.n, f.b);
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut sum = rhs[i];
            for k in lo..i {
                sum -= f.data[f.idx(i, k)] * rhs[k];
            }
            rhs[i] = sum / f.data[f.idx(i, i)];
        }
        for i in (0..n).rev() {
            let hi = (i + b).min(n - 1);
            let mut sum = rhs[i];
            for k in i + 1..=hi {
                sum -= f.data[f.idx(k, i)] * rhs[k];
            }
            rhs[i] = sum / f.data[f.idx(i, i)];
        }
    }
}

/// Dense solve with partial pivoting; `a` is row-major `n×n` and is consumed.
pub fn solve_dense(mut a: Vec<f64>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))?;
        if a[pivot * n + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            rhs.swap(col, pivot);
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / a[col * n + col];
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    for row in (0..n).rev() {
        let mut sum = rhs[row];
        for k in row + 1..n {
            sum -= a[row * n + k] * rhs[k];
        }
        rhs[row] = sum / a[row * n + row];
    }
    Some(rhs)
}
