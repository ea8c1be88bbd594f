//! Potentials and drifts as parsed, symbolically differentiable expressions.
//!
//! Every consumer of `V` (the action functional, the PDE solver, the
//! hypothesis checks) evaluates the same trees, so `V`, `∇V` and `ΔV` stay
//! mutually consistent.

mod ast;
mod diff;
mod parse;

pub use ast::{simplify, Expr, Func};
pub(crate) use ast::{add, mul, sub};
pub use diff::derivative;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("variable x{index} at offset {offset} exceeds dimension {dim}")]
    DimensionMismatch {
        offset: usize,
        index: usize,
        dim: usize,
    },
    #[error("dimension must be at least 1")]
    ZeroDimension,
}

impl ExprError {
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::DimensionMismatch { offset, .. } => Some(*offset),
            ExprError::ZeroDimension => None,
        }
    }
}

/// A scalar field `ℝᵈ → ℝ` given by an expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    ast: Expr,
    dim: usize,
    /// Shift `α ≥ 0` making `V + α` nonnegative on the working box.
    lower_bound_shift: f64,
    non_smooth: Vec<Func>,
}

impl PotentialExpr {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ExprError> {
        if dim == 0 {
            return Err(ExprError::ZeroDimension);
        }
        let ast = parse::parse_tree(source, dim)?;
        Ok(Self::from_tree(ast, dim))
    }

    /// Wrap an existing tree. Variables beyond `dim` are a programming error.
    pub fn from_tree(ast: Expr, dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        if let Some(v) = ast.max_var() {
            assert!(v < dim, "variable x{} exceeds dimension {dim}", v + 1);
        }
        let mut non_smooth = Vec::new();
        ast.non_smooth_calls(&mut non_smooth);
        Self {
            ast,
            dim,
            lower_bound_shift: 0.0,
            non_smooth,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::from_tree(Expr::Const(0.0), dim)
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower_bound_shift(&self) -> f64 {
        self.lower_bound_shift
    }

    /// Non-smooth primitives (`abs`, `sqrt`) present in the expression.
    /// Their presence means `ΔV` may not exist everywhere.
    pub fn non_smooth(&self) -> &[Func] {
        &self.non_smooth
    }

    pub fn is_smooth(&self) -> bool {
        self.non_smooth.is_empty()
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.ast.eval(point)
    }

    /// Minimum of `V` over a tensor grid with `per_axis` points per axis.
    pub fn sampled_min(&self, extents: &[(f64, f64)], per_axis: usize) -> f64 {
        assert_eq!(extents.len(), self.dim);
        let per_axis = per_axis.max(2);
        let mut min = f64::INFINITY;
        let mut point = vec![0.0; self.dim];
        let total = per_axis.pow(self.dim as u32);
        for flat in 0..total {
            let mut rem = flat;
            for (k, &(lo, hi)) in extents.iter().enumerate() {
                let i = rem % per_axis;
                rem /= per_axis;
                point[k] = lo + (hi - lo) * i as f64 / (per_axis - 1) as f64;
            }
            min = min.min(self.eval(&point));
        }
        min
    }

    /// Set the lower-bound shift from samples on the working box:
    /// `α = −min V + 1e−9` when the sampled minimum is negative, else 0.
    /// This is a sampling heuristic, not a global bound.
    pub fn with_sampled_shift(mut self, extents: &[(f64, f64)], per_axis: usize) -> Self {
        let min = self.sampled_min(extents, per_axis);
        self.lower_bound_shift = if min < 0.0 { -min + 1e-9 } else { 0.0 };
        self
    }

    pub fn with_shift(mut self, alpha: f64) -> Self {
        assert!(alpha >= 0.0);
        self.lower_bound_shift = alpha;
        self
    }

    /// `V + α` as a new expression (with zero recorded shift).
    pub fn shifted(&self) -> Self {
        let ast = Expr::Add(
            Box::new(self.ast.clone()),
            Box::new(Expr::Const(self.lower_bound_shift)),
        );
        Self::from_tree(ast, self.dim)
    }

    pub fn differentiate(&self) -> ScalarField {
        differentiate(self)
    }
}

impl std::fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.ast.fmt(f)
    }
}

/// A potential together with its symbolic gradient, Hessian and Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dim: usize,
    value: Expr,
    gradient: Vec<Expr>,
    hessian: Vec<Vec<Expr>>,
    laplacian: Expr,
    smooth: bool,
    lower_bound_shift: f64,
}

pub fn differentiate(expr: &PotentialExpr) -> ScalarField {
    let dim = expr.dim();
    let value = simplify(expr.ast());
    let gradient: Vec<Expr> = (0..dim).map(|i| derivative(&value, i)).collect();
    let hessian: Vec<Vec<Expr>> = gradient
        .iter()
        .map(|g| (0..dim).map(|j| derivative(g, j)).collect())
        .collect();
    let laplacian = (0..dim).fold(Expr::Const(0.0), |acc, i| {
        ast::add(acc, hessian[i][i].clone())
    });
    ScalarField {
        dim,
        value,
        gradient,
        hessian,
        laplacian,
        smooth: expr.is_smooth(),
        lower_bound_shift: expr.lower_bound_shift(),
    }
}

impl ScalarField {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ExprError> {
        Ok(PotentialExpr::parse(source, dim)?.differentiate())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    pub fn lower_bound_shift(&self) -> f64 {
        self.lower_bound_shift
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.gradient.iter().map(|g| g.eval(x)).collect()
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, g) in out.iter_mut().zip(&self.gradient) {
            *o = g.eval(x);
        }
    }

    /// Row-major `d×d` Hessian.
    pub fn hessian_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, row) in self.hessian.iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                out[i * self.dim + j] = h.eval(x);
            }
        }
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        self.laplacian.eval(x)
    }

    pub fn value_tree(&self) -> &Expr {
        &self.value
    }

    pub fn gradient_trees(&self) -> &[Expr] {
        &self.gradient
    }

    pub fn laplacian_tree(&self) -> &Expr {
        &self.laplacian
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn central_gradient(f: &ScalarField, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (f.value(&p) - f.value(&m)) / (2.0 * h)
            })
            .collect()
    }

    fn central_laplacian(f: &ScalarField, x: &[f64], h: f64) -> f64 {
        let v0 = f.value(x);
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (f.value(&p) - 2.0 * v0 + f.value(&m)) / (h * h)
            })
            .sum()
    }

    #[test]
    fn parses_quadratic() {
        let v = PotentialExpr::parse("x1^2", 1).unwrap();
        assert_eq!(v.ast(), &Expr::Pow(Box::new(Expr::Var(0)), 2));
        let v2 = PotentialExpr::parse("x1^2 + x2^2", 2).unwrap();
        assert_eq!(v2.eval(&[3.0, 4.0]), 25.0);
    }

    #[test]
    fn syntax_error_offset() {
        let err = PotentialExpr::parse("x1 +", 1).unwrap_err();
        assert!(matches!(err, ExprError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        assert!(matches!(
            PotentialExpr::parse("y + 1", 1),
            Err(ExprError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            PotentialExpr::parse("x1 + x3", 2),
            Err(ExprError::DimensionMismatch { index: 3, dim: 2, .. })
        ));
        assert!(matches!(
            PotentialExpr::parse("x0", 2),
            Err(ExprError::DimensionMismatch { index: 0, .. })
        ));
        assert!(matches!(
            PotentialExpr::parse("x1^1.5", 1),
            Err(ExprError::Syntax { offset: 3, .. })
        ));
        assert!(PotentialExpr::parse("sin x1", 1).is_err());
        assert!(PotentialExpr::parse("(x1", 1).is_err());
        assert_eq!(PotentialExpr::parse("x1", 0), Err(ExprError::ZeroDimension));
    }

    #[test]
    fn flags_non_smooth() {
        let v = PotentialExpr::parse("abs(x1) + sqrt(x1^2 + 1)", 1).unwrap();
        assert_eq!(v.non_smooth(), &[Func::Abs, Func::Sqrt]);
        assert!(!v.differentiate().is_smooth());
        assert!(PotentialExpr::parse("sin(x1)", 1).unwrap().is_smooth());
    }

    #[test]
    fn precedence_and_unary_minus() {
        let v = PotentialExpr::parse("-x1^2 + 2*3 - 4/2", 1).unwrap();
        assert_eq!(v.eval(&[3.0]), -9.0 + 6.0 - 2.0);
        let w = PotentialExpr::parse("2^-2 * x1", 1).unwrap();
        assert_eq!(w.eval(&[8.0]), 2.0);
        let e = PotentialExpr::parse("1.5e-1 + .5", 1).unwrap();
        assert!((e.eval(&[0.0]) - 0.65).abs() < 1e-15);
    }

    #[test]
    fn quadratic_derivatives() {
        let f = ScalarField::parse("x1^2", 1).unwrap();
        assert_eq!(f.gradient_trees()[0].to_string(), "(2 * x1)");
        assert_eq!(f.laplacian_tree(), &Expr::Const(2.0));
        let g = ScalarField::parse("x1^2 + x2^2", 2).unwrap();
        assert_eq!(g.laplacian_tree(), &Expr::Const(4.0));
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        // value-field oracle at fixed pseudo-random points
        let g = ScalarField::parse("x1^2 + x2^2", 2).unwrap();
        let s = ScalarField::parse("sin(x1) + 2", 1).unwrap();
        for k in 0..10 {
            let a = -4.0 + 0.83 * k as f64;
            let b = 3.1 - 0.57 * k as f64;
            assert!((g.laplacian(&[a, b]) - central_laplacian(&g, &[a, b], 1e-3)).abs() < 1e-6);
            assert!((g.laplacian(&[a, b]) - 4.0).abs() < 1e-15);
            let lap = s.laplacian(&[a]);
            assert!((lap + a.sin()).abs() < 1e-15);
            assert!(lap <= 1.0);
            assert!((lap - central_laplacian(&s, &[a], 1e-3)).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_of_all_functions() {
        let f = ScalarField::parse(
            "sin(x1)*cos(x2) + exp(x1/3) + sinh(x2/2) - cosh(x1/4) + tanh(x1*x2) + x1^-2 + 1/(1+x2^2)",
            2,
        )
        .unwrap();
        for &(a, b) in &[(0.7, -1.2), (2.1, 0.4), (-1.5, 1.9)] {
            let sym = f.gradient(&[a, b]);
            let fd = central_gradient(&f, &[a, b], 1e-5);
            for (s, d) in sym.iter().zip(&fd) {
                assert!((s - d).abs() < 1e-6 * (1.0 + s.abs()), "{s} vs {d}");
            }
            let lap = f.laplacian(&[a, b]);
            assert!((lap - central_laplacian(&f, &[a, b], 1e-4)).abs() < 1e-4 * (1.0 + lap.abs()));
        }
    }

    #[test]
    fn shift_does_not_change_derivatives() {
        let v = PotentialExpr::parse("sin(x1) - 3", 1)
            .unwrap()
            .with_sampled_shift(&[(-5.0, 5.0)], 2001);
        assert!(v.lower_bound_shift() > 3.99 && v.lower_bound_shift() < 4.0 + 1e-6);
        let shifted = v.shifted().differentiate();
        let plain = v.differentiate();
        assert_eq!(shifted.gradient_trees(), plain.gradient_trees());
        assert_eq!(shifted.laplacian_tree(), plain.laplacian_tree());
        let nonneg = PotentialExpr::parse("x1^2", 1)
            .unwrap()
            .with_sampled_shift(&[(-1.0, 1.0)], 11);
        assert_eq!(nonneg.lower_bound_shift(), 0.0);
    }

    #[test]
    fn canonical_print_reparses() {
        let v = PotentialExpr::parse("-2*x1^2 + x2/(-3) - (-x1)^-1", 2).unwrap();
        let printed = v.to_string();
        let again = PotentialExpr::parse(&printed, 2).unwrap();
        assert_eq!(v.ast(), again.ast(), "{printed}");
    }
}
