//! Multistart gradient ascent on one landscape cell.
//!
//! `cargo run --release --example grape_table_cell -- 4 6` optimizes
//! `φ_W = 4π/20`, `T = 6π/20` with `N = 4 + 6` intervals.

use std::f64::consts::PI;

use twolevel_control::gate::{grape_maximize, ClosedGateProblem};

fn main() -> twolevel_control::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (j, i) = match args[..] {
        [j, i, ..] => (j, i),
        _ => (4, 6),
    };
    let p = ClosedGateProblem::new(j as f64 * PI / 20.0, i as f64 * PI / 20.0, 4 + i)?;
    let r = grape_maximize(&p, 10, 0);
    println!("phi_W = {j}pi/20, T = {i}pi/20, N = {}", p.intervals);
    println!("J_W(0)   = {:.6}", p.zero_control_value());
    println!("best J_W = {:.6} after {} iterations ({:?})", r.best_value, r.iterations, r.stop);
    println!("delta    = {:.6}", r.best_value - p.zero_control_value());
    println!("control  = {:.3?}", r.best_point);
    Ok(())
}
