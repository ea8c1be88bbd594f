use super::ast::{add, c, call, div, mul, neg, pow, sub, Expr, Func};

/// Partial derivative with respect to the zero-based variable `var`,
/// simplified on the way up.
pub fn derivative(e: &Expr, var: usize) -> Expr {
    match e {
        Expr::Const(_) => c(0.0),
        Expr::Var(i) => c(if *i == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => {
            let (a, b) = (simp(a), simp(b));
            add(
                mul(derivative(&a, var), b.clone()),
                mul(a, derivative(&b, var)),
            )
        }
        Expr::Div(a, b) => {
            let (a, b) = (simp(a), simp(b));
            let da = derivative(&a, var);
            let db = derivative(&b, var);
            if db.is_zero() {
                return div(da, b);
            }
            div(sub(mul(da, b.clone()), mul(a, db)), pow(b, 2))
        }
        Expr::Pow(a, k) => {
            let a = simp(a);
            let da = derivative(&a, var);
            mul(mul(c(*k as f64), pow(a, k - 1)), da)
        }
        Expr::Call(f, a) => {
            let a = simp(a);
            let da = derivative(&a, var);
            if da.is_zero() {
                return c(0.0);
            }
            let outer = match f {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Exp => call(Func::Exp, a),
                Func::Sinh => call(Func::Cosh, a),
                Func::Cosh => call(Func::Sinh, a),
                Func::Tanh => pow(call(Func::Cosh, a), -2),
                Func::Sqrt => div(c(0.5), call(Func::Sqrt, a)),
                // sign(a); undefined at 0
                Func::Abs => div(a.clone(), call(Func::Abs, a)),
            };
            mul(outer, da)
        }
    }
}

fn simp(e: &Expr) -> Expr {
    super::ast::simplify(e)
}
