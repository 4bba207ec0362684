//! Multistart local maximization of `J_W` with the exact gradient.
//!
//! Each start runs [`lbfgs_minimize`] on `−J_W`; with an amplitude bound
//! that is projected gradient ascent.

use rand::Rng;
use rayon::prelude::*;

use super::{value_and_gradient, ClosedGateProblem};
use crate::lbfgs::{lbfgs_minimize, LbfgsOptions};
use crate::report::OptimizerReport;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrapeOptions {
    /// Stop when `‖∇J_W‖_∞` falls below this.
    pub grad_tol: f64,
    pub max_iterations: usize,
    pub max_evaluations: usize,
    /// Starts are drawn uniformly from `[−init_amplitude, init_amplitude]`.
    pub init_amplitude: f64,
    /// L-BFGS memory length.
    pub memory: usize,
    /// Stream index used when drawing the starts (grid node id in sweeps).
    pub node: u64,
}

impl Default for GrapeOptions {
    fn default() -> Self {
        GrapeOptions {
            grad_tol: 1e-8,
            max_iterations: 1_000_000,
            max_evaluations: 1_000_000,
            init_amplitude: 1.0,
            memory: 10,
            node: 0,
        }
    }
}

pub fn grape_maximize(prob: &ClosedGateProblem, starts: usize, rng_seed: u64) -> OptimizerReport {
    grape_maximize_with(prob, starts, rng_seed, &GrapeOptions::default())
}

/// Runs `starts` independent ascents and keeps the best final value.
///
/// Start `j` draws from stream `(seed, opts.node, j)`, so adding starts never
/// changes the earlier ones. Ties go to the lower start index.
pub fn grape_maximize_with(
    prob: &ClosedGateProblem,
    starts: usize,
    rng_seed: u64,
    opts: &GrapeOptions,
) -> OptimizerReport {
    let starts = starts.max(1);
    let runs: Vec<OptimizerReport> = (0..starts)
        .into_par_iter()
        .map(|j| {
            let mut r = rng::stream(rng_seed, opts.node, j as u64);
            let bound = opts.init_amplitude;
            let mut a0: Vec<f64> = (0..prob.intervals).map(|_| r.random_range(-bound..=bound)).collect();
            if let Some(nu) = prob.amplitude_bound {
                a0.iter_mut().for_each(|v| *v = v.clamp(-nu, nu));
            }
            ascend(prob, a0, opts)
        })
        .collect();

    let mut best = 0;
    for (j, r) in runs.iter().enumerate() {
        if r.best_value > runs[best].best_value {
            best = j;
        }
    }
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let mut out = runs[best].clone();
    out.evaluations = evaluations;
    out
}

/// Maximizes `J_W` from `a0` by minimizing `−J_W`.
fn ascend(prob: &ClosedGateProblem, a0: Vec<f64>, opts: &GrapeOptions) -> OptimizerReport {
    let eval = |x: &[f64]| {
        let (j, g) = value_and_gradient(prob, x);
        (-j, g.into_iter().map(|v| -v).collect::<Vec<f64>>())
    };
    let lb = LbfgsOptions {
        grad_tol: opts.grad_tol,
        max_iterations: opts.max_iterations,
        max_evaluations: opts.max_evaluations,
        memory: opts.memory,
        threshold: f64::NEG_INFINITY,
    };
    let mut r = lbfgs_minimize(eval, a0, prob.amplitude_bound.map(|nu| (-nu, nu)), &lb);
    r.best_value = -r.best_value;
    r.history.iter_mut().for_each(|v| *v = -*v);
    r.best_time = Some(prob.duration);
    r
}
