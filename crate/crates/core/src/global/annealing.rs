//! Dual annealing: generalized (Tsallis) simulated annealing with periodic
//! local polishing, following the usual distorted Cauchy–Lorentz visiting
//! scheme. Visits wrap around the box so every trial point is feasible.

use rand::Rng;
use rand_distr::StandardNormal;

use super::nelder_mead;
use super::{AnnealingParams, BoxDomain, Counted, GlobalSearchConfig};
use crate::report::{OptimizerReport, StopReason};
use crate::rng::{self, Rng as ChaRng};

const TAIL_LIMIT: f64 = 1e8;
const MIN_VISIT_BOUND: f64 = 1e-10;
const MAX_REINIT: usize = 1000;

struct Visiting {
    qv: f64,
    factor4_p: f64,
    factor6: f64,
}

impl Visiting {
    fn new(qv: f64) -> Self {
        let factor2 = ((4.0 - qv) * (qv - 1.0).ln()).exp();
        let factor3 = ((2.0 - qv) * std::f64::consts::LN_2 / (qv - 1.0)).exp();
        let factor4_p = std::f64::consts::PI.sqrt() * factor2 / (factor3 * (3.0 - qv));
        let factor5 = 1.0 / (qv - 1.0) - 0.5;
        let d1 = 2.0 - factor5;
        let pi1 = std::f64::consts::PI * (1.0 - factor5);
        let factor6 = pi1 / pi1.sin() / libm::lgamma(d1).exp();
        Visiting { qv, factor4_p, factor6 }
    }

    fn draw(&self, temperature: f64, r: &mut ChaRng) -> f64 {
        let qv = self.qv;
        let x: f64 = r.sample(StandardNormal);
        let y: f64 = r.sample(StandardNormal);
        let factor1 = (temperature.ln() / (qv - 1.0)).exp();
        let factor4 = self.factor4_p * factor1;
        let x = x * (-(qv - 1.0) * (self.factor6 / factor4).ln() / (3.0 - qv)).exp();
        let den = ((qv - 1.0) * y.abs().ln() / (3.0 - qv)).exp();
        x / den
    }

    /// First `dim` steps move every coordinate, the next `dim` move one each.
    fn visit(&self, domain: &BoxDomain, x: &[f64], step: usize, temperature: f64, r: &mut ChaRng) -> Vec<f64> {
        let dim = x.len();
        let wrap = |k: usize, v: f64| {
            let range = domain.upper[k] - domain.lower[k];
            let a = v - domain.lower[k];
            let b = a % range + range;
            let mut w = b % range + domain.lower[k];
            if (w - domain.lower[k]).abs() < MIN_VISIT_BOUND {
                w += MIN_VISIT_BOUND;
            }
            w
        };
        let mut out = x.to_vec();
        if step < dim {
            let mut visits: Vec<f64> = (0..dim).map(|_| self.draw(temperature, r)).collect();
            let upper: f64 = r.random();
            let lower: f64 = r.random();
            for v in visits.iter_mut() {
                if *v > TAIL_LIMIT {
                    *v = TAIL_LIMIT * upper;
                } else if *v < -TAIL_LIMIT {
                    *v = -TAIL_LIMIT * lower;
                }
            }
            for k in 0..dim {
                out[k] = wrap(k, x[k] + visits[k]);
            }
        } else {
            let mut v = self.draw(temperature, r);
            if v > TAIL_LIMIT {
                v = TAIL_LIMIT * r.random::<f64>();
            } else if v < -TAIL_LIMIT {
                v = -TAIL_LIMIT * r.random::<f64>();
            }
            let k = step - dim;
            out[k] = wrap(k, x[k] + v);
        }
        out
    }
}

struct State {
    current: Vec<f64>,
    current_e: f64,
    best: Vec<f64>,
    best_e: f64,
}

fn uniform_point(domain: &BoxDomain, r: &mut ChaRng) -> Vec<f64> {
    (0..domain.dim()).map(|k| r.random_range(domain.lower[k]..domain.upper[k])).collect()
}

fn reset<F: Fn(&[f64]) -> f64>(fc: &mut Counted<F>, domain: &BoxDomain, r: &mut ChaRng, s: &mut State) {
    for _ in 0..MAX_REINIT {
        s.current = uniform_point(domain, r);
        s.current_e = fc.call(&s.current);
        if s.current_e.is_finite() {
            break;
        }
    }
    if s.current_e < s.best_e {
        s.best_e = s.current_e;
        s.best = s.current.clone();
    }
}

pub fn dual_annealing<F>(f: &F, domain: &BoxDomain, cfg: &GlobalSearchConfig) -> OptimizerReport
where
    F: Fn(&[f64]) -> f64,
{
    let p: &AnnealingParams = &cfg.annealing;
    let dim = domain.dim();
    // Distinct from the DE streams of the same run index.
    let mut r = rng::stream(cfg.seed, cfg.stream, cfg.run | (1 << 31));
    let mut fc = Counted::new(f);
    let vd = Visiting::new(p.visit);
    let ls_iters = (6 * dim).clamp(100, 1000);
    let local = |fc: &mut Counted<F>, x: &[f64]| nelder_mead::run(fc, x, domain, ls_iters, 1e-8, 1e-12);

    let mut s = State { current: vec![], current_e: f64::INFINITY, best: vec![], best_e: f64::INFINITY };
    reset(&mut fc, domain, &mut r, &mut s);
    let mut emin = s.current_e;
    let mut xmin = s.current.clone();
    let mut not_improved = 0usize;
    let mut not_improved_max = 1000usize;

    let t_restart = p.initial_temp * p.restart_temp_ratio;
    let t1 = ((p.visit - 1.0) * std::f64::consts::LN_2).exp() - 1.0;
    let mut history = vec![s.best_e];
    let mut iteration = 0usize;
    let budget = cfg.max_evaluations;

    let stop = 'outer: loop {
        for i in 0..p.max_iterations {
            let t2 = ((p.visit - 1.0) * (i as f64 + 2.0).ln()).exp() - 1.0;
            let temperature = p.initial_temp * t1 / t2;
            if iteration >= p.max_iterations {
                break 'outer StopReason::MaxIterations;
            }
            if temperature < t_restart {
                reset(&mut fc, domain, &mut r, &mut s);
                break;
            }

            // Markov chain at this temperature.
            let t_step = temperature / (i as f64 + 1.0);
            not_improved += 1;
            let mut improved = i == 0;
            for j in 0..2 * dim {
                let xv = vd.visit(domain, &s.current, j, temperature, &mut r);
                let e = fc.call(&xv);
                if e < s.current_e {
                    s.current_e = e;
                    s.current = xv.clone();
                    if e < s.best_e {
                        s.best_e = e;
                        s.best = xv;
                        improved = true;
                        not_improved = 0;
                    }
                } else {
                    let u: f64 = r.random();
                    let base = 1.0 - (1.0 - p.accept) * (e - s.current_e) / t_step;
                    let prob = if base <= 0.0 { 0.0 } else { (base.ln() / (1.0 - p.accept)).exp() };
                    if u <= prob {
                        s.current_e = e;
                        s.current = xv;
                        xmin = s.current.clone();
                    }
                    if not_improved >= not_improved_max && (j == 0 || s.current_e < emin) {
                        emin = s.current_e;
                        xmin = s.current.clone();
                    }
                }
                if fc.evaluations >= budget {
                    history.push(s.best_e);
                    break 'outer StopReason::MaxEvaluations;
                }
            }

            if p.local_search {
                if improved {
                    let (e, x) = local(&mut fc, &s.best.clone());
                    if e < s.best_e {
                        not_improved = 0;
                        s.best_e = e;
                        s.best = x.clone();
                        s.current_e = e;
                        s.current = x;
                    }
                    if fc.evaluations >= budget {
                        history.push(s.best_e);
                        break 'outer StopReason::MaxEvaluations;
                    }
                }
                if not_improved >= not_improved_max {
                    let (e, x) = local(&mut fc, &xmin.clone());
                    xmin = x.clone();
                    emin = e;
                    not_improved = 0;
                    not_improved_max = dim;
                    if e < s.best_e {
                        s.best_e = e;
                        s.best = x.clone();
                        s.current_e = e;
                        s.current = x;
                    }
                    if fc.evaluations >= budget {
                        history.push(s.best_e);
                        break 'outer StopReason::MaxEvaluations;
                    }
                }
            }
            iteration += 1;
            history.push(s.best_e);
        }
    };

    OptimizerReport {
        best_point: s.best,
        best_value: s.best_e,
        best_time: None,
        history,
        iterations: iteration,
        evaluations: fc.evaluations,
        stop,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visiting_distribution_is_finite() {
        let vd = Visiting::new(2.62);
        let mut r = rng::stream(1, 0, 0);
        for t in [5230.0, 1.0, 0.1] {
            for _ in 0..1000 {
                assert!(vd.draw(t, &mut r).is_finite());
            }
        }
    }

    #[test]
    fn visits_stay_inside() {
        let vd = Visiting::new(2.62);
        let d = BoxDomain::symmetric(3, 2.0).unwrap();
        let mut r = rng::stream(2, 0, 0);
        let mut x = vec![0.0; 3];
        for step in 0..600 {
            x = vd.visit(&d, &x, step % 6, 5230.0, &mut r);
            assert!(d.contains(&x), "{x:?}");
        }
    }

    #[test]
    fn sphere_minimum() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let d = BoxDomain::symmetric(4, 50.0).unwrap();
        let rep = dual_annealing(&f, &d, &GlobalSearchConfig::default());
        assert!(rep.best_value <= 1e-6, "{}", rep.best_value);
    }

    #[test]
    fn rastrigin_global_minimum() {
        let f = |x: &[f64]| 10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos()).sum::<f64>();
        let d = BoxDomain::symmetric(3, 5.12).unwrap();
        let cfg = GlobalSearchConfig { seed: 3, ..Default::default() };
        let rep = dual_annealing(&f, &d, &cfg);
        assert!(rep.best_value < 1e-6, "{}", rep.best_value);
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(d.contains(&rep.best_point));
        assert_eq!(rep, dual_annealing(&f, &d, &cfg));
    }
}
