//! The variation penalty trades a slightly worse distance for a control
//! without large jumps between neighbouring intervals.

use twolevel_control::gpm::PenaltyConfig;
use twolevel_control::stage1::{solve_stage1, stage1_objective_g1, Stage1Method, Stage1Problem};
use twolevel_control::{BlochState, OpenSystemParams};

fn max_jump(a: &[f64]) -> f64 {
    a.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

fn main() -> twolevel_control::Result<()> {
    let prob = Stage1Problem::new(OpenSystemParams::default(), BlochState::raw(1.0, 0.0, 0.0), BlochState::raw(0.0, 0.0, 0.5), 450.0, 225)?;
    let m = Stage1Method::Lbfgs { max_iters: 2000, threshold: 0.0 };
    let a0 = vec![0.0; 225];
    let plain = solve_stage1(&prob, &a0, &m, None)?;
    println!("no penalty:  g1 = {:.3e}, max jump {:.2}", stage1_objective_g1(&prob, &plain.best_point)?, max_jump(&plain.best_point));
    for (alpha, delta) in [(1e-2, 1.0), (1.0, 1.0)] {
        let pc = PenaltyConfig::new(alpha, delta)?;
        let r = solve_stage1(&prob, &a0, &m, Some(&pc))?;
        println!(
            "alpha {alpha}, delta {delta}: g1 = {:.3e}, max jump {:.2}",
            stage1_objective_g1(&prob, &r.best_point)?,
            max_jump(&r.best_point)
        );
    }
    Ok(())
}
