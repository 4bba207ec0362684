//! Gradient projection with optional heavy-ball momentum:
//!
//! `a⁽ᵐ⁺¹⁾ = Pr_Q(a⁽ᵐ⁾ − β ∇g(a⁽ᵐ⁾) + λ (a⁽ᵐ⁾ − a⁽ᵐ⁻¹⁾))`,
//!
//! where the first step (and any step after a momentum restart) drops the
//! momentum term.

mod penalty;

pub use penalty::{penalty_value_and_gradient, PenaltyConfig};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{OptimizerReport, StopReason};

/// Closed interval; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) || lo.is_nan() {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// `[0, ∞)`.
    pub const NONNEGATIVE: Interval = Interval { lo: 0.0, hi: f64::INFINITY };

    /// `[0, n_max]`.
    pub fn up_to(n_max: f64) -> Self {
        Interval { lo: 0.0, hi: n_max }
    }

    pub fn contains(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }
}

/// Nearest point of `q` to `z`.
pub fn project_box(z: f64, q: Interval) -> f64 {
    if z < q.lo {
        q.lo
    } else if z > q.hi {
        q.hi
    } else {
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GpmVariant {
    /// Plain projected gradient.
    OneStep,
    /// Projected gradient with momentum after the first step.
    TwoStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpmConfig {
    pub beta: f64,
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop as soon as the objective drops below this value (`ε²` for the
    /// squared-distance objectives).
    pub threshold: f64,
    pub variant: GpmVariant,
    /// Halve `β` and restart momentum when the objective grows more than
    /// tenfold over 50 iterations.
    pub divergence_guard: bool,
}

impl GpmConfig {
    pub fn two_step(beta: f64, lambda: f64, max_iters: usize, threshold: f64) -> Self {
        GpmConfig {
            beta,
            lambda,
            max_iters,
            threshold,
            variant: GpmVariant::TwoStep,
            divergence_guard: true,
        }
    }

    pub fn one_step(beta: f64, max_iters: usize, threshold: f64) -> Self {
        GpmConfig {
            lambda: 0.0,
            variant: GpmVariant::OneStep,
            ..Self::two_step(beta, 0.0, max_iters, threshold)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("step β = {} must be > 0", self.beta)));
        }
        if !(0.0..1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("momentum λ = {} outside [0, 1)", self.lambda)));
        }
        Ok(())
    }

    fn momentum(&self) -> Option<f64> {
        match self.variant {
            GpmVariant::TwoStep if self.lambda != 0.0 => Some(self.lambda),
            _ => None,
        }
    }
}

const GUARD_WINDOW: usize = 50;
const GUARD_GROWTH: f64 = 10.0;

/// Tracks the divergence guard state; returns true when β was halved.
struct Guard {
    enabled: bool,
    anchor: usize,
}

impl Guard {
    fn trip(&mut self, history: &[f64], beta: &mut f64) -> bool {
        let m = history.len() - 1;
        if !self.enabled || m < self.anchor + GUARD_WINDOW {
            return false;
        }
        if history[m] > GUARD_GROWTH * history[m - GUARD_WINDOW] {
            *beta *= 0.5;
            self.anchor = m;
            return true;
        }
        false
    }
}

fn finite_or_abort(m: usize, value: f64, grad: &[f64]) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(format!("objective at iteration {m}")));
    }
    if let Some(k) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient component {} at iteration {m}", k + 1)));
    }
    Ok(())
}

fn step(a: &[f64], prev: &[f64], grad: &[f64], beta: f64, momentum: Option<f64>, q: Interval) -> Vec<f64> {
    match momentum {
        None => a.iter().zip(grad).map(|(ak, gk)| project_box(ak - beta * gk, q)).collect(),
        Some(lambda) => a
            .iter()
            .zip(grad)
            .zip(prev)
            .map(|((ak, gk), pk)| project_box(ak - beta * gk + lambda * (ak - pk), q))
            .collect(),
    }
}

/// Minimizes `g` over `Q^N` from the feasible point `a0`.
///
/// `g` returns the value and the exact gradient. The report's `best_point`
/// is the iterate with the lowest recorded value.
pub fn gpm_minimize<G>(mut g: G, a0: &[f64], q: Interval, cfg: &GpmConfig) -> Result<OptimizerReport>
where
    G: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    cfg.validate()?;
    if let Some(k) = a0.iter().position(|z| !q.contains(*z)) {
        return Err(Error::InvalidControl(format!(
            "start a_{} = {} outside [{}, {}]",
            k + 1,
            a0[k],
            q.lo,
            q.hi
        )));
    }
    let mut a = a0.to_vec();
    let mut prev = a.clone();
    let (mut value, mut grad) = g(&a);
    finite_or_abort(0, value, &grad)?;
    let mut history = vec![value];
    let mut best = (value, a.clone());
    let mut beta = cfg.beta;
    let mut guard = Guard { enabled: cfg.divergence_guard, anchor: 0 };
    let mut fresh = true;
    let mut m = 0;

    let stop = loop {
        if value < cfg.threshold {
            break StopReason::Threshold;
        }
        if m >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        let momentum = if fresh { None } else { cfg.momentum() };
        let next = step(&a, &prev, &grad, beta, momentum, q);
        prev = std::mem::replace(&mut a, next);
        fresh = false;
        m += 1;
        (value, grad) = g(&a);
        finite_or_abort(m, value, &grad)?;
        history.push(value);
        if value < best.0 {
            best = (value, a.clone());
        }
        if guard.trip(&history, &mut beta) {
            fresh = true;
        }
    };

    Ok(OptimizerReport {
        best_point: best.1,
        best_value: best.0,
        best_time: None,
        history,
        iterations: m,
        evaluations: m + 1,
        stop,
    })
}

/// Result of the time-augmented method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimedReport {
    pub report: OptimizerReport,
    /// Duration iterate after every step (entry 0 is the start).
    pub times: Vec<f64>,
}

/// Minimizes `g(t, a)` jointly over the duration `t ∈ time_box` and
/// `a ∈ Q^N`.
///
/// `g` returns `(value, ∂g/∂t, ∇_a g)`, always evaluated at the current
/// iterate. Both coordinates share `β`, `λ` and the stopping rule.
pub fn gpm_minimize_with_time<G>(mut g: G, t0: f64, a0: &[f64], q: Interval, time_box: Interval, cfg: &GpmConfig) -> Result<TimedReport>
where
    G: FnMut(f64, &[f64]) -> (f64, f64, Vec<f64>),
{
    cfg.validate()?;
    if !(time_box.lo < time_box.hi) || time_box.lo <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time box [{}, {}] must satisfy 0 < min < max",
            time_box.lo, time_box.hi
        )));
    }
    if !time_box.contains(t0) {
        return Err(Error::InvalidParameter(format!("start time {t0} outside the time box")));
    }
    if let Some(k) = a0.iter().position(|z| !q.contains(*z)) {
        return Err(Error::InvalidControl(format!("start a_{} = {} outside Q", k + 1, a0[k])));
    }

    let mut a = a0.to_vec();
    let mut prev = a.clone();
    let (mut t, mut t_prev) = (t0, t0);
    let (mut value, mut gt, mut ga) = g(t, &a);
    finite_or_abort(0, value, &ga)?;
    finite_or_abort(0, gt, &[])?;
    let mut history = vec![value];
    let mut times = vec![t];
    let mut best = (value, t, a.clone());
    let mut beta = cfg.beta;
    let mut guard = Guard { enabled: cfg.divergence_guard, anchor: 0 };
    let mut fresh = true;
    let mut m = 0;

    let stop = loop {
        if value < cfg.threshold {
            break StopReason::Threshold;
        }
        if m >= cfg.max_iters {
            break StopReason::MaxIterations;
        }
        let momentum = if fresh { None } else { cfg.momentum() };
        let next_a = step(&a, &prev, &ga, beta, momentum, q);
        let next_t = step(&[t], &[t_prev], &[gt], beta, momentum, time_box)[0];
        prev = std::mem::replace(&mut a, next_a);
        t_prev = std::mem::replace(&mut t, next_t);
        fresh = false;
        m += 1;
        (value, gt, ga) = g(t, &a);
        finite_or_abort(m, value, &ga)?;
        finite_or_abort(m, gt, &[])?;
        history.push(value);
        times.push(t);
        if value < best.0 {
            best = (value, t, a.clone());
        }
        if guard.trip(&history, &mut beta) {
            fresh = true;
        }
    };

    Ok(TimedReport {
        report: OptimizerReport {
            best_point: best.2,
            best_value: best.0,
            best_time: Some(best.1),
            history,
            iterations: m,
            evaluations: m + 1,
            stop,
        },
        times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(target: Vec<f64>) -> impl FnMut(&[f64]) -> (f64, Vec<f64>) {
        move |a: &[f64]| {
            let d: Vec<f64> = a.iter().zip(&target).map(|(x, y)| x - y).collect();
            (d.iter().map(|v| v * v).sum(), d.iter().map(|v| 2.0 * v).collect())
        }
    }

    #[test]
    fn projection_cases() {
        assert_eq!(project_box(-3.0, Interval::NONNEGATIVE), 0.0);
        assert_eq!(project_box(42.0, Interval::up_to(100.0)), 42.0);
        assert_eq!(project_box(150.0, Interval::up_to(100.0)), 100.0);
        assert_eq!(project_box(1e300, Interval::NONNEGATIVE), 1e300);
    }

    #[test]
    fn momentum_converges_on_quadratic() {
        let target = vec![1.5, 3.0, 0.25];
        let cfg = GpmConfig::two_step(0.1, 0.5, 500, 0.0);
        let r = gpm_minimize(quadratic(target.clone()), &[0.0; 3], Interval::NONNEGATIVE, &cfg).unwrap();
        for (x, y) in r.best_point.iter().zip(&target) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_momentum_is_one_step() {
        let target = vec![2.0, -1.0, 0.7, 5.0];
        let two = GpmConfig::two_step(0.3, 0.0, 40, 0.0);
        let one = GpmConfig::one_step(0.3, 40, 0.0);
        let q = Interval::up_to(4.0);
        let a = gpm_minimize(quadratic(target.clone()), &[1.0; 4], q, &two).unwrap();
        let b = gpm_minimize(quadratic(target), &[1.0; 4], q, &one).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.best_point, b.best_point);
    }

    #[test]
    fn iterates_stay_feasible() {
        let q = Interval::up_to(1.0);
        let mut seen = Vec::new();
        let cfg = GpmConfig::two_step(0.9, 0.9, 100, 0.0);
        let g = |a: &[f64]| {
            seen.push(a.to_vec());
            quadratic(vec![-2.0, 3.0])(a)
        };
        let r = gpm_minimize(g, &[0.5, 0.5], q, &cfg).unwrap();
        assert!(seen.iter().flatten().all(|v| q.contains(*v)));
        assert_eq!(r.best_point, vec![0.0, 1.0]);
    }

    #[test]
    fn stops_at_threshold_and_rejects_infeasible_start() {
        let cfg = GpmConfig::one_step(0.25, 1000, 1e-6);
        let r = gpm_minimize(quadratic(vec![1.0]), &[0.0], Interval::NONNEGATIVE, &cfg).unwrap();
        assert_eq!(r.stop, StopReason::Threshold);
        assert!(r.best_value < 1e-6);
        assert!(gpm_minimize(quadratic(vec![1.0]), &[-1.0], Interval::NONNEGATIVE, &cfg).is_err());
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let cfg = GpmConfig::one_step(1.0, 10, 0.0);
        let r = gpm_minimize(|_a: &[f64]| (1.0, vec![f64::NAN]), &[0.0], Interval::NONNEGATIVE, &cfg);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn guard_halves_step_on_divergence() {
        // β = 1.1 on g = a² overshoots with growth factor 1.2² per step.
        let cfg = GpmConfig::one_step(1.1, 400, 0.0);
        let q = Interval::new(-1e6, 1e6).unwrap();
        let r = gpm_minimize(quadratic(vec![0.0]), &[1.0], q, &cfg).unwrap();
        assert!(*r.history.last().unwrap() < 1e-6);
        let off = GpmConfig { divergence_guard: false, ..cfg };
        let r = gpm_minimize(quadratic(vec![0.0]), &[1.0], q, &off).unwrap();
        assert!(*r.history.last().unwrap() > 1e6);
    }

    #[test]
    fn time_only_penalty_walks_down_to_floor() {
        let cfg = GpmConfig::one_step(0.5, 30, f64::NEG_INFINITY);
        let tb = Interval::new(2.0, 10.0).unwrap();
        let r = gpm_minimize_with_time(|t, a| (t, 1.0, vec![0.0; a.len()]), 8.0, &[0.0], Interval::NONNEGATIVE, tb, &cfg).unwrap();
        for (m, t) in r.times.iter().enumerate() {
            assert_eq!(*t, (8.0 - 0.5 * m as f64).max(2.0));
        }
    }
}
