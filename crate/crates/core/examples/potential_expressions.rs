//! Parse a potential, differentiate it symbolically and apply the
//! lower-bound shift.

use harnack_lab::expr::{PotentialExpr, ScalarField};

fn main() {
    let v = PotentialExpr::parse("(x1^2 - 1)^2 - 0.5 + 0.1*x2^2", 2).expect("valid expression");
    let field = v.differentiate();
    let p = [0.5, -1.0];
    println!("V({p:?})      = {}", field.value(&p));
    println!("∇V({p:?})     = {:?}", field.gradient(&p));
    println!("ΔV({p:?})     = {}", field.laplacian(&p));
    println!("∂V/∂x1 tree  = {}", field.gradient_trees()[0]);

    let shifted = v.with_sampled_shift(&[(-2.0, 2.0), (-2.0, 2.0)], 41);
    println!("shift α      = {:.9}", shifted.lower_bound_shift());
    println!("min of V+α   ≈ {:.3e}", shifted.shifted().sampled_min(&[(-2.0, 2.0), (-2.0, 2.0)], 41));

    match ScalarField::parse("x1 + * 2", 1) {
        Err(e) => println!("parse error at offset {:?}: {e}", e.offset()),
        Ok(_) => unreachable!(),
    }
    let kink = PotentialExpr::parse("abs(x1)", 1).unwrap();
    println!("abs(x1) smooth? {} (flags {:?})", kink.is_smooth(), kink.non_smooth());
}
