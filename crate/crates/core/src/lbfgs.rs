//! Limited-memory BFGS with Armijo backtracking, optionally on a box.
//!
//! With a box the curvature memory is dropped and the iteration becomes
//! projected steepest descent with the same line search.

use crate::report::{OptimizerReport, StopReason};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsOptions {
    /// Stop when the sup norm of the projected gradient falls below this.
    pub grad_tol: f64,
    pub max_iterations: usize,
    pub max_evaluations: usize,
    pub memory: usize,
    /// Stop once the objective drops below this value.
    pub threshold: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            grad_tol: 1e-8,
            max_iterations: 1_000_000,
            max_evaluations: 1_000_000,
            memory: 10,
            threshold: f64::NEG_INFINITY,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Minimizes `eval` (value and gradient) from `x0`, keeping every
/// iterate in `[lo, hi]^n` when `bounds` is given.
pub fn lbfgs_minimize<F>(eval: F, x0: Vec<f64>, bounds: Option<(f64, f64)>, opts: &LbfgsOptions) -> OptimizerReport
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let bound = bounds;
    let clip = |x: &mut [f64]| {
        if let Some((lo, hi)) = bound {
            x.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    };
    // Gradient components that would push a bound coordinate outward are
    // inactive.
    let projected = |x: &[f64], g: &[f64]| -> Vec<f64> {
        match bound {
            None => g.to_vec(),
            Some((lo, hi)) => x
                .iter()
                .zip(g)
                .map(|(&xi, &gi)| if (xi >= hi && gi < 0.0) || (xi <= lo && gi > 0.0) { 0.0 } else { gi })
                .collect(),
        }
    };
    let mut x = x0;
    clip(&mut x);
    let (mut fx, mut gx) = eval(&x);
    let mut evaluations = 1;
    let mut history = vec![fx];
    let mut mem: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;

    let stop = loop {
        if fx < opts.threshold {
            break StopReason::Threshold;
        }
        let pg = projected(&x, &gx);
        if inf_norm(&pg) < opts.grad_tol {
            break StopReason::Stationary;
        }
        if iterations >= opts.max_iterations {
            break StopReason::MaxIterations;
        }
        if evaluations >= opts.max_evaluations {
            break StopReason::MaxEvaluations;
        }

        let mut d = if bound.is_none() {
            two_loop(&pg, &mem)
        } else {
            pg.iter().map(|v| -v).collect()
        };
        if dot(&d, &pg) >= 0.0 {
            mem.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        // Without curvature information, try a unit move in the sup norm;
        // capping at the raw gradient length stalls on flat plateaus.
        let mut step = if mem.is_empty() {
            1.0 / inf_norm(&pg)
        } else {
            1.0
        };
        let mut accepted = None;
        let mut budget_hit = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            clip(&mut trial);
            let (ft, gt) = eval(&trial);
            evaluations += 1;
            let decrease = dot(&pg, &trial.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            if ft <= fx + 1e-4 * decrease {
                accepted = Some((trial, ft, gt));
                break;
            }
            if evaluations >= opts.max_evaluations {
                budget_hit = true;
                break;
            }
            step *= 0.5;
        }

        match accepted {
            Some((xn, fn_, gn)) => {
                let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gn.iter().zip(&gx).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && bound.is_none() {
                    if mem.len() == opts.memory {
                        mem.remove(0);
                    }
                    mem.push((s, y, 1.0 / sy));
                }
                let stalled = fn_ >= fx;
                x = xn;
                fx = fn_;
                gx = gn;
                iterations += 1;
                history.push(fx);
                if stalled && mem.is_empty() {
                    break StopReason::NoProgress;
                }
            }
            None if budget_hit => break StopReason::MaxEvaluations,
            None if mem.is_empty() => break StopReason::NoProgress,
            None => mem.clear(),
        }
    };

    OptimizerReport {
        best_point: x,
        best_value: fx,
        best_time: None,
        history,
        iterations,
        evaluations,
        stop,
    }
}

/// L-BFGS two-loop recursion, returns `−H g`.
fn two_loop(g: &[f64], mem: &[(Vec<f64>, Vec<f64>, f64)]) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = vec![0.0; mem.len()];
    for (i, (s, y, rho)) in mem.iter().enumerate().rev() {
        let a = rho * dot(s, &q);
        alphas[i] = a;
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
    }
    if let Some((s, y, _)) = mem.last() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for (i, (s, y, rho)) in mem.iter().enumerate() {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (alphas[i] - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let v = (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
            let g = vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * (x[1] - x[0] * x[0]), 200.0 * (x[1] - x[0] * x[0])];
            (v, g)
        };
        let r = lbfgs_minimize(f, vec![-1.2, 1.0], None, &LbfgsOptions::default());
        assert_eq!(r.stop, StopReason::Stationary);
        assert!(r.best_value < 1e-12);
    }

    #[test]
    fn box_active_constraint() {
        let f = |x: &[f64]| ((x[0] - 3.0).powi(2), vec![2.0 * (x[0] - 3.0)]);
        let r = lbfgs_minimize(f, vec![0.0], Some((-1.0, 1.0)), &LbfgsOptions::default());
        assert_eq!(r.best_point, vec![1.0]);
    }

    #[test]
    fn threshold_stop() {
        let f = |x: &[f64]| (x[0] * x[0], vec![2.0 * x[0]]);
        let opts = LbfgsOptions { threshold: 0.5, ..Default::default() };
        let r = lbfgs_minimize(f, vec![2.0], None, &opts);
        assert_eq!(r.stop, StopReason::Threshold);
    }
}
