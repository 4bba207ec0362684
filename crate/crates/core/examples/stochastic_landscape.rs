//! Differential evolution and dual annealing over the landscape grid.
//!
//! Runs the bottom two time rows by default; pass `full` for the whole
//! 9 × 10 grid (a few seconds in release mode).

use twolevel_control::global::{landscape_sweep, GlobalSearchConfig, GridSpec, LandscapeSummary, SweepMethod};

fn main() -> twolevel_control::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let grid = if full {
        GridSpec::default()
    } else {
        GridSpec { time_indices: vec![1, 2], ..Default::default() }
    };
    let cfg = GlobalSearchConfig::default();
    let rows = landscape_sweep(&grid, SweepMethod::Stochastic { de_runs: 2, da_runs: 2 }, &cfg)?;
    for r in &rows {
        println!("phi {} T {}: J_W(0) {:.3}  best {:.3}  delta {:.3}", r.phi_index, r.time_index, r.jw_zero, r.jw_max, r.delta);
    }
    let s = LandscapeSummary::of(&rows);
    println!("{} nodes: delta mean {:.4} min {:.4} max {:.4}", s.nodes, s.delta_mean, s.delta_min, s.delta_max);
    Ok(())
}
