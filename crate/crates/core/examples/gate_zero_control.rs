//! The zero control on the phase-gate problem: its fidelity is
//! `cos²(φ_W + T)` and it is a critical point of every objective.

use std::f64::consts::PI;

use twolevel_control::gate::{self, ClosedGateProblem};
use twolevel_control::PiecewiseConstantControl;

fn main() -> twolevel_control::Result<()> {
    println!("{:>6} {:>6} {:>12} {:>12} {:>10} {:>10}", "phi_W", "T", "J_W(0)", "cos^2", "|grad|", "pmp");
    for (j, i) in [(1, 1), (4, 6), (9, 10), (5, 5)] {
        let phi = j as f64 * PI / 20.0;
        let t = i as f64 * PI / 20.0;
        let p = ClosedGateProblem::new(phi, t, 4 + i)?;
        let zero = PiecewiseConstantControl::zeros(t, p.intervals)?;
        let jw = gate::objective_jw(&p, &zero)?;
        let g = gate::gradient_jw(&p, &zero)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pmp = gate::pmp_residual_at_zero(&p, 200).max();
        println!("{phi:6.3} {t:6.3} {jw:12.9} {:12.9} {g:10.1e} {pmp:10.1e}", (phi + t).cos().powi(2));
    }
    Ok(())
}
