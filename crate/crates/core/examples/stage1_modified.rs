//! Piecewise constant incoherent control steering `(1, 0, 0)` toward the
//! north-pole state `(0, 0, 1/2)` in `t̂ = 450` with 225 intervals.
//!
//! Compares plain projected gradient, the momentum variant and L-BFGS.

use twolevel_control::gpm::GpmConfig;
use twolevel_control::stage1::{solve_stage1, Stage1Method, Stage1Problem};
use twolevel_control::{BlochState, OpenSystemParams};

fn main() -> twolevel_control::Result<()> {
    let prob = Stage1Problem::new(OpenSystemParams::default(), BlochState::raw(1.0, 0.0, 0.0), BlochState::raw(0.0, 0.0, 0.5), 450.0, 225)?;
    let eps2 = 1e-6;
    let methods = [
        ("gpm1", Stage1Method::Gpm(GpmConfig::one_step(10.0, 1000, eps2))),
        ("gpm2", Stage1Method::Gpm(GpmConfig::two_step(10.0, 0.999, 1000, eps2))),
        ("lbfgs", Stage1Method::Lbfgs { max_iters: 1000, threshold: eps2 }),
    ];
    for (name, m) in methods {
        let r = solve_stage1(&prob, &vec![0.0; 225], &m, None)?;
        let first = r.first_iteration(|g| g <= eps2);
        println!("{name:>5}: g1 = {:.3e} after {} iterations, stop {:?}, first below 1e-6: {first:?}", r.best_value, r.iterations, r.stop);
    }
    Ok(())
}
