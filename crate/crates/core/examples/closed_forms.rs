//! Fundamental solutions, rate pairs and the Harnack bound in closed form.

use harnack_lab::action::TimeWindow;
use harnack_lab::closedform::{harnack_rhs, heat_kernel, mehler_kernel, omega_heat, omega_quadratic, RatePair};

fn main() {
    println!("Γ(0, 1)       = {:.6}", heat_kernel(&[0.0], 1.0).unwrap());
    println!("Mehler(0, ½)  = {:.6}", mehler_kernel(&[0.0], 0.5, 1.0).unwrap());

    let w = TimeWindow::new(1.0, 0.5).unwrap();
    let heat = RatePair::heat(1);
    let sinh = RatePair::quadratic(1, 1.0);
    for pair in [&heat, &sinh] {
        println!("{:<28} β(s)/β(t) = {:.6}", pair.label(), (pair.log_beta(w.s) - pair.log_beta(w.t)).exp());
    }

    // Heat kernel: equality at y = (s/t)x.
    let (x, y) = ([1.2], [0.6]);
    let u_ys = heat_kernel(&y, w.s).unwrap();
    let bound = harnack_rhs(u_ys, &heat, w, omega_heat(&x, &y, w), None);
    println!("heat:   u(x,t) = {:.12}, bound = {:.12}", heat_kernel(&x, w.t).unwrap(), bound);

    // Mehler kernel: equality on sinh(2s)x = sinh(2t)y.
    let y = [x[0] * 1.0_f64.sinh() / 2.0_f64.sinh()];
    let u_ys = mehler_kernel(&y, w.s, 1.0).unwrap();
    let bound = harnack_rhs(u_ys, &sinh, w, omega_quadratic(&x, &y, w, 1.0, 0.0, &[0.0]), None);
    println!("mehler: u(x,t) = {:.12}, bound = {:.12}", mehler_kernel(&x, w.t, 1.0).unwrap(), bound);
}
