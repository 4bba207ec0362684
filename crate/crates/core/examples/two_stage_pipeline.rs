//! Both stages for the off-diagonal target `(1/2, 0, 0)`, which shares its
//! spectrum with `(0, 0, −1/2)` and so reuses the same first stage.

use twolevel_control::quantum::{bloch_to_density, eigenvalues_descending, intermediate_targets};
use twolevel_control::stage1::{solve_stage1, stage1_state, Stage1Method, Stage1Problem};
use twolevel_control::stage2::{stage2_grid_search, FamilySpec, Stage2SearchSpec};
use twolevel_control::{BlochState, OpenSystemParams, Pole};

fn main() -> twolevel_control::Result<()> {
    let params = OpenSystemParams::default();
    let x0 = BlochState::raw(1.0, 0.0, 0.0);
    let target = BlochState::raw(0.5, 0.0, 0.0);
    let x_tilde = intermediate_targets(&eigenvalues_descending(&bloch_to_density(&target)?)).select(Pole::North);
    println!("intermediate target ({}, {}, {})", x_tilde.x1, x_tilde.x2, x_tilde.x3);

    let prob = Stage1Problem::new(params, x0, x_tilde, 450.0, 225)?;
    let s1 = solve_stage1(&prob, &vec![0.0; 225], &Stage1Method::Lbfgs { max_iters: 1000, threshold: 1e-6 }, None)?;
    let mid = stage1_state(&prob, 450.0, &s1.best_point)?;
    println!("stage 1: distance {:.2e} after {} iterations", mid.distance(&x_tilde), s1.iterations);

    let spec = Stage2SearchSpec::new(FamilySpec::Cos { omega: 1.0 }, 100.0, 450.0, 490.0, 1e-2);
    let s2 = stage2_grid_search(&params, &mid, &target, &spec)?;
    println!("stage 2: A = {:.2}, T = {:.2}, distance {:.2e}", s2.control.amplitude, s2.final_time, s2.distance);
    println!("total duration {:.2}", s2.final_time);
    Ok(())
}
