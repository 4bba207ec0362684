//! Coherent second stage: the earliest `(A, T)` on a grid for which a
//! harmonic pulse brings the stage-1 state within `10⁻²` of the target.
//!
//! Pass `sin` to search the sine harmonics instead (much slower).

use twolevel_control::stage1::{solve_stage1, stage1_state, Stage1Method, Stage1Problem};
use twolevel_control::stage2::{stage2_grid_search, FamilySpec, Stage2SearchSpec};
use twolevel_control::{BlochState, OpenSystemParams};

fn main() -> twolevel_control::Result<()> {
    let params = OpenSystemParams::default();
    let prob = Stage1Problem::new(params, BlochState::raw(1.0, 0.0, 0.0), BlochState::raw(0.0, 0.0, 0.5), 450.0, 225)?;
    let s1 = solve_stage1(&prob, &vec![0.0; 225], &Stage1Method::Lbfgs { max_iters: 1000, threshold: 1e-6 }, None)?;
    let x_init = stage1_state(&prob, 450.0, &s1.best_point)?;
    println!("x(450) = ({:.3e}, {:.3e}, {:.6})", x_init.x1, x_init.x2, x_init.x3);

    let family = if std::env::args().any(|a| a == "sin") {
        FamilySpec::Sin { max_harmonic: 3 }
    } else {
        FamilySpec::Cos { omega: 1.0 }
    };
    let spec = Stage2SearchSpec::new(family, 100.0, 450.0, 490.0, 1e-2);
    let sol = stage2_grid_search(&params, &x_init, &BlochState::raw(0.0, 0.0, -0.5), &spec)?;
    println!("{:?}", sol.control);
    println!("T = {:.2}, distance = {:.4e}, v(450) = {:.3}, v(T) = {:.3}", sol.final_time, sol.distance, sol.v_start, sol.v_end);
    Ok(())
}
