//! Adjoint gradient of the windowed stage-2 objective, checked against a
//! finite difference and used for a few descent steps.

use std::f64::consts::PI;

use twolevel_control::stage2::{adjoint_gradient_j2alpha, objective_j2alpha, sampled_inner, AdjointConfig};
use twolevel_control::{BlochState, OpenSystemParams};

fn main() -> twolevel_control::Result<()> {
    let params = OpenSystemParams::default();
    let x0 = BlochState::raw(0.0, 0.0, 0.5);
    let target = BlochState::raw(0.0, 0.0, -0.5);
    let cfg = AdjointConfig { alpha: 1e-4, b: 1.0, start: 450.0, end: 455.0 };
    let m = 2000;
    let mut v: Vec<f64> = (0..=m).map(|i| -60.0 * (2.0 * PI * i as f64 / m as f64).sin()).collect();

    let grad = adjoint_gradient_j2alpha(&params, &x0, &target, &v, &cfg)?;
    let dir: Vec<f64> = (0..=m).map(|i| (PI * i as f64 / m as f64).sin()).collect();
    let h = 1e-5;
    let shifted = |s: f64| v.iter().zip(&dir).map(|(a, b)| a + s * b).collect::<Vec<_>>();
    let fd = (objective_j2alpha(&params, &x0, &target, &shifted(h), &cfg)? - objective_j2alpha(&params, &x0, &target, &shifted(-h), &cfg)?) / (2.0 * h);
    println!("directional derivative: adjoint {:.6e}, finite difference {fd:.6e}", sampled_inner(&grad, &dir, &cfg));

    let beta = 200.0;
    for it in 0..=10 {
        let j = objective_j2alpha(&params, &x0, &target, &v, &cfg)?;
        if it % 2 == 0 {
            println!("step {it:2}: J = {j:.6}");
        }
        let g = adjoint_gradient_j2alpha(&params, &x0, &target, &v, &cfg)?;
        v.iter_mut().zip(&g).for_each(|(vi, gi)| *vi -= beta * gi);
    }
    Ok(())
}
