//! Free stage length: minimizes `t̂ + P′‖x(t̂) − x̃‖²` so the stage gets
//! shorter while the distance term keeps it accurate.

use twolevel_control::gpm::{GpmConfig, Interval};
use twolevel_control::stage1::{solve_stage1, solve_stage1_timed, stage1_state, Stage1Method, Stage1Problem};
use twolevel_control::{BlochState, OpenSystemParams};

fn main() -> twolevel_control::Result<()> {
    let base = Stage1Problem::new(OpenSystemParams::default(), BlochState::raw(1.0, 0.0, 0.0), BlochState::raw(0.0, 0.0, 0.5), 450.0, 225)?;
    let warm = solve_stage1(&base, &vec![0.0; 225], &Stage1Method::Lbfgs { max_iters: 1000, threshold: 1e-8 }, None)?;
    for p_prime in [1e3, 1e5] {
        let prob = base.with_p_prime(p_prime);
        let cfg = GpmConfig::one_step(0.05, 300, f64::NEG_INFINITY);
        let r = solve_stage1_timed(&prob, 450.0, &warm.best_point, Interval::new(100.0, 450.0)?, &cfg)?;
        let t = r.report.best_time.unwrap_or(450.0);
        let d = stage1_state(&prob, t, &r.report.best_point)?.distance(&prob.x_tilde);
        println!("P' = {p_prime:e}: t_hat {:.2} -> {t:.2}, distance {d:.3e}", r.times[0]);
    }
    Ok(())
}
