//! Drivers that minimize `g₁`, optionally with the variation penalty, and
//! `g_Φ` with free stage length.

use serde::Serialize;

use super::{stage1_gradient, Stage1Problem};
use crate::error::Result;
use crate::gpm::{gpm_minimize, gpm_minimize_with_time, penalty_value_and_gradient, GpmConfig, Interval, PenaltyConfig, TimedReport};
use crate::lbfgs::{lbfgs_minimize, LbfgsOptions};
use crate::report::OptimizerReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Stage1Method {
    Gpm(GpmConfig),
    /// Quasi-Newton on `a = z²`, with `a` capped at `n_max`.
    Lbfgs { max_iters: usize, threshold: f64 },
}

/// Smallest start used by the squared parametrization; `z = 0` is a
/// stationary point of every objective in `z`.
const LBFGS_FLOOR: f64 = 1e-2;

/// Minimizes `g₁ (+ R^α)` at the problem's `t̂` from the feasible `a0`.
///
/// `history` holds the full objective, `best_point` the amplitudes.
pub fn solve_stage1(prob: &Stage1Problem, a0: &[f64], method: &Stage1Method, penalty: Option<&PenaltyConfig>) -> Result<OptimizerReport> {
    prob.check(prob.t_hat, a0)?;
    let n_max = prob.params.n_max;
    let value_grad = |a: &[f64]| -> (f64, Vec<f64>) {
        let Ok(j) = stage1_gradient(prob, prob.t_hat, a) else {
            return (f64::NAN, vec![f64::NAN; a.len()]);
        };
        let mut value = j.state.distance_squared(&prob.x_tilde);
        let mut grad = j.dg1_da;
        if let Some(pc) = penalty {
            let (r, dr) = penalty_value_and_gradient(a, pc);
            value += r;
            grad.iter_mut().zip(dr).for_each(|(g, d)| *g += d);
        }
        (value, grad)
    };
    match method {
        Stage1Method::Gpm(cfg) => gpm_minimize(value_grad, a0, Interval::up_to(n_max), cfg),
        Stage1Method::Lbfgs { max_iters, threshold } => {
            let to_a = |z: &[f64]| z.iter().map(|v| (v * v).min(n_max)).collect::<Vec<f64>>();
            let eval = |z: &[f64]| {
                let a = to_a(z);
                let (v, g) = value_grad(&a);
                let gz = z
                    .iter()
                    .zip(g)
                    .map(|(zi, gi)| if zi * zi < n_max { 2.0 * zi * gi } else { 0.0 })
                    .collect();
                (v, gz)
            };
            let z0: Vec<f64> = a0.iter().map(|a| a.max(LBFGS_FLOOR).sqrt()).collect();
            let opts = LbfgsOptions {
                max_iterations: *max_iters,
                threshold: *threshold,
                ..Default::default()
            };
            let mut r = lbfgs_minimize(eval, z0, None, &opts);
            if !r.best_value.is_finite() {
                return Err(crate::Error::NonFinite("stage-1 objective".into()));
            }
            r.best_point = to_a(&r.best_point);
            Ok(r)
        }
    }
}

/// Minimizes `g_Φ(t̂, a) = t̂ + P′ g₁` jointly, `t̂ ∈ time_box`.
pub fn solve_stage1_timed(prob: &Stage1Problem, t0: f64, a0: &[f64], time_box: Interval, cfg: &GpmConfig) -> Result<TimedReport> {
    prob.check(t0, a0)?;
    let g = |t: f64, a: &[f64]| match stage1_gradient(prob, t, a) {
        Ok(j) => {
            let value = t + prob.p_prime * j.state.distance_squared(&prob.x_tilde);
            (value, j.dgphi_dt, j.dgphi_da)
        }
        Err(_) => (f64::NAN, f64::NAN, vec![f64::NAN; a.len()]),
    };
    gpm_minimize_with_time(g, t0, a0, Interval::up_to(prob.params.n_max), time_box, cfg)
}
