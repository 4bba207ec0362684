//! How long the constant incoherent control needs to get within `ε` of
//! the intermediate target, and how much the optimized stage saves.

use twolevel_control::quantum::{bloch_to_density, constant_incoherent_level, eigenvalues_descending, intermediate_targets};
use twolevel_control::stage1::unmodified_stage_duration;
use twolevel_control::{BlochState, OpenSystemParams, Pole};

fn main() -> twolevel_control::Result<()> {
    let params = OpenSystemParams::default();
    let cases = [
        ("x0 = (1,0,0)", BlochState::raw(1.0, 0.0, 0.0), Pole::North),
        ("x0 = (0,0,-1)", BlochState::raw(0.0, 0.0, -1.0), Pole::South),
    ];
    let target = BlochState::raw(0.0, 0.0, 0.5);
    let spectrum = eigenvalues_descending(&bloch_to_density(&target)?);
    let n_bar = constant_incoherent_level(&spectrum)?;
    for (label, x0, pole) in cases {
        let x_tilde = intermediate_targets(&spectrum).select(pole);
        for eps in [1e-2, 1e-3] {
            let t = unmodified_stage_duration(&params, &x0, &x_tilde, n_bar, eps)?;
            println!("{label}, eps = {eps:e}: t_hat = {t:.2}  (t/450 = {:.2}, t/400 = {:.2})", t / 450.0, t / 400.0);
        }
    }
    Ok(())
}
