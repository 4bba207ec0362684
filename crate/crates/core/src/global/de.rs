//! Differential evolution, DE/rand/1/bin.
//!
//! Trial vectors for a whole generation are drawn first and evaluated in
//! parallel; selection then replaces each member by its trial if the trial
//! is no worse.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use super::{nelder_mead, BoxDomain, GlobalSearchConfig};
use crate::report::{OptimizerReport, StopReason};
use crate::rng;

pub fn differential_evolution<F>(f: &F, domain: &BoxDomain, cfg: &GlobalSearchConfig) -> OptimizerReport
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let p = &cfg.de;
    let dim = domain.dim();
    let np = (p.popsize * dim).max(4);
    let mut r = rng::stream(cfg.seed, cfg.stream, cfg.run);
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    // Latin hypercube start: one sample per stratum in every coordinate.
    let mut pop = vec![vec![0.0; dim]; np];
    for k in 0..dim {
        let mut strata: Vec<usize> = (0..np).collect();
        strata.shuffle(&mut r);
        let width = domain.upper[k] - domain.lower[k];
        for (i, s) in strata.into_iter().enumerate() {
            let u: f64 = r.random();
            pop[i][k] = domain.lower[k] + width * (s as f64 + u) / np as f64;
        }
    }
    let mut energy: Vec<f64> = pop.par_iter().map(|x| eval(x)).collect();
    let mut evaluations = np;
    let argmin = |e: &[f64]| (0..e.len()).min_by(|&i, &j| e[i].total_cmp(&e[j])).unwrap();
    let mut best = argmin(&energy);
    let mut history = vec![energy[best]];
    let mut generations = 0;

    let stop = loop {
        if generations >= p.generations {
            break StopReason::MaxIterations;
        }
        if evaluations + np > cfg.max_evaluations {
            break StopReason::MaxEvaluations;
        }
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let j = r.random_range(0..np);
                    if j != i {
                        break j;
                    }
                };
                let a = pick();
                let b = loop {
                    let j = pick();
                    if j != a {
                        break j;
                    }
                };
                let c = loop {
                    let j = pick();
                    if j != a && j != b {
                        break j;
                    }
                };
                let forced = r.random_range(0..dim);
                let mut t = pop[i].clone();
                for k in 0..dim {
                    if k == forced || r.random::<f64>() < p.crossover {
                        t[k] = pop[a][k] + p.mutation * (pop[b][k] - pop[c][k]);
                    }
                }
                domain.clip(&mut t);
                t
            })
            .collect();
        let values: Vec<f64> = trials.par_iter().map(|x| eval(x)).collect();
        evaluations += np;
        for (i, (t, v)) in trials.into_iter().zip(values).enumerate() {
            if v <= energy[i] {
                pop[i] = t;
                energy[i] = v;
            }
        }
        best = argmin(&energy);
        generations += 1;
        history.push(energy[best]);
    };

    let mut point = pop[best].clone();
    let mut value = energy[best];
    if p.polish && evaluations < cfg.max_evaluations {
        let iters = (6 * dim).clamp(100, 1000);
        let (v, x, n) = nelder_mead(f, &point, domain, iters);
        evaluations += n;
        if v < value {
            value = v;
            point = x;
        }
    }

    OptimizerReport {
        best_point: point,
        best_value: value,
        best_time: None,
        history,
        iterations: generations,
        evaluations,
        stop,
    }
}
