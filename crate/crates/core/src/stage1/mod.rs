//! First stage: steering by piecewise constant incoherent control with the
//! coherent field switched off.
//!
//! Distances here are Bloch 2-norms. The Hilbert–Schmidt distance of the
//! corresponding density matrices is smaller by `√2`, so
//! `g₁ = ‖x − x̃‖² = 2 ‖ρ − ρ̃‖²_HS`; accuracy thresholds apply to the Bloch
//! norm.

mod closed_form;
mod duration;
mod gradient;
mod solve;

pub use closed_form::{stage1_state, stage1_trajectory, TrajectorySample};
pub use duration::{constant_control_state, unmodified_stage_duration, unmodified_stage_duration_with, DurationSearch};
pub use gradient::{stage1_gradient, Stage1Jacobian};
pub use solve::{solve_stage1, solve_stage1_timed, Stage1Method};

use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage1Problem {
    pub params: OpenSystemParams,
    pub x0: BlochState,
    /// Intermediate target `x̃` (diagonal state with the target's spectrum).
    pub x_tilde: BlochState,
    /// Stage length for the fixed-time problem.
    pub t_hat: f64,
    pub intervals: usize,
    /// Weight `P'` of the distance term in `g_Φ`.
    pub p_prime: f64,
}

impl Stage1Problem {
    pub fn new(params: OpenSystemParams, x0: BlochState, x_tilde: BlochState, t_hat: f64, intervals: usize) -> Result<Self> {
        params.validate()?;
        if !(t_hat > 0.0 && t_hat.is_finite()) {
            return Err(Error::InvalidParameter(format!("stage length {t_hat} must be > 0")));
        }
        if intervals == 0 {
            return Err(Error::InvalidParameter("need N ≥ 1 intervals".into()));
        }
        for x in [&x0, &x_tilde] {
            BlochState::new(x.x1, x.x2, x.x3)?;
        }
        Ok(Stage1Problem {
            params,
            x0,
            x_tilde,
            t_hat,
            intervals,
            p_prime: 0.0,
        })
    }

    pub fn with_p_prime(mut self, p_prime: f64) -> Self {
        self.p_prime = p_prime;
        self
    }

    pub(crate) fn check(&self, t_hat: f64, a: &[f64]) -> Result<()> {
        if !(t_hat > 0.0) {
            return Err(Error::InvalidParameter(format!("stage length {t_hat} must be > 0")));
        }
        if a.len() != self.intervals {
            return Err(Error::IntervalMismatch {
                expected: self.intervals,
                got: a.len(),
            });
        }
        if let Some((k, v)) = a.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidControl(format!(
                "incoherent amplitude a_{} = {v} must be ≥ 0",
                k + 1
            )));
        }
        Ok(())
    }
}

/// `g₁(a) = ‖x(t̂, a) − x̃‖²` at the problem's fixed `t̂`.
pub fn stage1_objective_g1(prob: &Stage1Problem, a: &[f64]) -> Result<f64> {
    Ok(stage1_state(prob, prob.t_hat, a)?.distance_squared(&prob.x_tilde))
}

/// `g_Φ(t̂, a) = t̂ + P' ‖x(t̂, a) − x̃‖²`.
pub fn stage1_objective_gphi(prob: &Stage1Problem, t_hat: f64, a: &[f64]) -> Result<f64> {
    let d2 = stage1_state(prob, t_hat, a)?.distance_squared(&prob.x_tilde);
    Ok(t_hat + prob.p_prime * d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example1() -> Stage1Problem {
        Stage1Problem::new(
            OpenSystemParams::default(),
            BlochState::raw(1.0, 0.0, 0.0),
            BlochState::raw(0.0, 0.0, 0.5),
            450.0,
            225,
        )
        .unwrap()
    }

    #[test]
    fn example1_zero_start() {
        let g = stage1_objective_g1(&example1(), &vec![0.0; 225]).unwrap();
        assert!((g - 0.4153).abs() < 1e-3, "{g}");
    }

    #[test]
    fn objectives_are_nonnegative_and_zero_at_target() {
        let p = Stage1Problem::new(
            OpenSystemParams::default(),
            BlochState::raw(0.0, 0.0, 0.3),
            BlochState::raw(0.0, 0.0, 0.3),
            1e-9,
            2,
        )
        .unwrap();
        let g = stage1_objective_g1(&p, &[0.0, 0.0]).unwrap();
        assert!(g >= 0.0 && g < 1e-20);
        let gp = stage1_objective_gphi(&p.with_p_prime(10.0), 2.0, &[1.0, 0.0]).unwrap();
        assert!(gp > 2.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = example1();
        assert!(stage1_state(&p, 450.0, &vec![0.0; 10]).is_err());
        let mut a = vec![0.0; 225];
        a[3] = -1e-3;
        assert!(matches!(stage1_state(&p, 450.0, &a), Err(Error::InvalidControl(_))));
        assert!(stage1_state(&p, 0.0, &vec![0.0; 225]).is_err());
    }
}
