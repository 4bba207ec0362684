//! Length of the unmodified first stage: how long a constant incoherent
//! control needs before the state is within `ε` of the intermediate target.

use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

/// State at time `t` under the constant incoherent level `n`.
pub fn constant_control_state(params: &OpenSystemParams, x0: &BlochState, n: f64, t: f64) -> BlochState {
    let g = params.gamma;
    let k = 1.0 + 2.0 * n;
    let z = (-0.5 * g * k * t).exp();
    let (s, c) = (params.omega * t).sin_cos();
    BlochState::raw(
        z * (x0.x1 * c + x0.x2 * s),
        z * (x0.x2 * c - x0.x1 * s),
        x0.x3 + (-g * k * t).exp_m1() * (x0.x3 - 1.0 / k),
    )
}

/// Scan settings for [`unmodified_stage_duration_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationSearch {
    /// Search stops at this time (default `10/γ`).
    pub horizon: f64,
    /// Sampling step of the bracketing scan (default `1/(100γ)`, shortened to
    /// `π/(8ω)` when the transverse rotation matters).
    pub step: f64,
    /// Width of the final bracket.
    pub tol: f64,
}

impl DurationSearch {
    pub fn defaults(params: &OpenSystemParams, x0: &BlochState, x_tilde: &BlochState) -> Self {
        let mut step = 1.0 / (100.0 * params.gamma);
        // Distance depends on the rotation phase only if both the start and
        // the target have transverse components.
        let transverse = |x: &BlochState| x.x1 != 0.0 || x.x2 != 0.0;
        if transverse(x0) && transverse(x_tilde) {
            step = step.min(std::f64::consts::PI / (8.0 * params.omega));
        }
        DurationSearch {
            horizon: 10.0 / params.gamma,
            step,
            tol: 1e-6,
        }
    }
}

pub fn unmodified_stage_duration(params: &OpenSystemParams, x0: &BlochState, x_tilde: &BlochState, n_bar: f64, eps: f64) -> Result<f64> {
    let search = DurationSearch::defaults(params, x0, x_tilde);
    unmodified_stage_duration_with(params, x0, x_tilde, n_bar, eps, &search)
}

/// Smallest `t̂ > 0` with `‖x̄(t̂) − x̃‖ = ε`.
///
/// The distance is sampled on a uniform grid. A sign change is refined by
/// bisection. A sampled local minimum that stays above `ε` is refined by a
/// golden-section search first, since the trajectory may dip below `ε`
/// between two samples and come back out.
pub fn unmodified_stage_duration_with(
    params: &OpenSystemParams,
    x0: &BlochState,
    x_tilde: &BlochState,
    n_bar: f64,
    eps: f64,
    search: &DurationSearch,
) -> Result<f64> {
    params.validate()?;
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(Error::InvalidControl(format!("constant level {n_bar} must be ≥ 0")));
    }
    let dist = |t: f64| constant_control_state(params, x0, n_bar, t).distance(x_tilde);
    let d0 = dist(0.0);
    if !(eps > 0.0 && eps < d0) {
        return Err(Error::InvalidParameter(format!(
            "accuracy {eps} must lie in (0, initial distance {d0})"
        )));
    }
    let f = |t: f64| dist(t) - eps;

    let bisect = |mut lo: f64, mut hi: f64| {
        while hi - lo > search.tol {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let steps = (search.horizon / search.step).ceil() as usize;
    let mut prev2 = (0.0, d0);
    let mut prev = prev2;
    for i in 1..=steps {
        let t = (i as f64 * search.step).min(search.horizon);
        let d = dist(t);
        if d <= eps {
            return Ok(bisect(prev.0, t));
        }
        if i >= 2 && prev.1 < prev2.1 && prev.1 <= d {
            let (tm, dm) = golden_min(&dist, prev2.0, t, search.tol);
            if dm <= eps {
                return Ok(bisect(prev2.0, tm));
            }
        }
        prev2 = prev;
        prev = (t, d);
    }
    Err(Error::UnreachableByConstantControl { horizon: search.horizon })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> OpenSystemParams {
        OpenSystemParams::default()
    }

    #[test]
    fn example1_durations() {
        let x0 = BlochState::raw(1.0, 0.0, 0.0);
        let xt = BlochState::raw(0.0, 0.0, 0.5);
        // Hand solution: e^{−γt} √(1 + e^{−2γt}/4) = ε.
        let t2 = unmodified_stage_duration(&params(), &x0, &xt, 0.5, 1e-2).unwrap();
        let t3 = unmodified_stage_duration(&params(), &x0, &xt, 0.5, 1e-3).unwrap();
        let check = |t: f64, eps: f64| {
            let e = (-0.002 * t).exp();
            assert!((e * (1.0 + e * e / 4.0).sqrt() - eps).abs() < 1e-8 * eps.max(1.0));
        };
        check(t2, 1e-2);
        check(t3, 1e-3);
        assert!((t2 - 2303.0).abs() < 1.0 && (t3 - 3454.0).abs() < 1.0);
    }

    #[test]
    fn example2_narrow_window() {
        let x0 = BlochState::raw(0.0, 0.0, -1.0);
        let xt = BlochState::raw(0.0, 0.0, -0.5);
        let t2 = unmodified_stage_duration(&params(), &x0, &xt, 0.5, 1e-2).unwrap();
        let t3 = unmodified_stage_duration(&params(), &x0, &xt, 0.5, 1e-3).unwrap();
        assert!((t2 - 98.9).abs() < 0.2, "{t2}");
        assert!((t3 - 101.1).abs() < 0.2, "{t3}");
        // A coarse scan that never samples inside the window still finds it.
        let coarse = DurationSearch { horizon: 5000.0, step: 7.0, tol: 1e-6 };
        let tc = unmodified_stage_duration_with(&params(), &x0, &xt, 0.5, 1e-3, &coarse).unwrap();
        assert!((tc - t3).abs() < 1e-5);
    }

    #[test]
    fn unreachable_accuracy() {
        // Steady state x₃ = 1/(1+2n) = 0.5 while the target sits at −0.5.
        let x0 = BlochState::raw(0.0, 0.0, 0.0);
        let xt = BlochState::raw(0.0, 0.0, -0.5);
        let r = unmodified_stage_duration(&params(), &x0, &xt, 0.5, 0.1);
        assert!(matches!(r, Err(Error::UnreachableByConstantControl { .. })));
    }
}
