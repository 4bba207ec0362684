use serde::Serialize;

use super::Stage1Problem;
use crate::error::Result;
use crate::quantum::BlochState;

/// Per-interval quantities shared by the state and gradient formulas.
///
/// Rates `c_s = 1 + 2a_s`, step decay `κ = γ t̂ / N`, and for each `s` the
/// tail exponent `Σ_{m>s} c_m` accumulated as a sum so only one `exp` is
/// taken per factor.
pub(crate) struct Pieces {
    pub kappa: f64,
    pub c: Vec<f64>,
    /// `tail[s] = Σ_{m>s} c_m` (0-based, `tail[N−1] = 0`).
    pub tail: Vec<f64>,
    pub mean_a: f64,
}

impl Pieces {
    pub fn new(gamma: f64, t_hat: f64, a: &[f64]) -> Self {
        let n = a.len();
        let c: Vec<f64> = a.iter().map(|ak| 1.0 + 2.0 * ak).collect();
        let mut tail = vec![0.0; n];
        for s in (0..n.saturating_sub(1)).rev() {
            tail[s] = tail[s + 1] + c[s + 1];
        }
        Pieces {
            kappa: gamma * t_hat / n as f64,
            mean_a: a.iter().sum::<f64>() / n as f64,
            c,
            tail,
        }
    }

    /// `(1 − exp(−κ c_s)) / c_s`.
    pub fn relax(&self, s: usize) -> f64 {
        -(-self.kappa * self.c[s]).exp_m1() / self.c[s]
    }

    /// `exp(−κ Σ_{m>s} c_m)`.
    pub fn carry(&self, s: usize) -> f64 {
        (-self.kappa * self.tail[s]).exp()
    }
}

/// Final state `x(t̂, a)` from the closed-form solution.
///
/// The transverse part rotates by `ωt̂` and shrinks by
/// `Z = exp(−γt̂(1/2 + mean a))`; the longitudinal part relaxes towards
/// `1/(1 + 2a_s)` on each interval.
pub fn stage1_state(prob: &Stage1Problem, t_hat: f64, a: &[f64]) -> Result<BlochState> {
    prob.check(t_hat, a)?;
    Ok(state_unchecked(prob, t_hat, a))
}

pub(crate) fn state_unchecked(prob: &Stage1Problem, t_hat: f64, a: &[f64]) -> BlochState {
    let p = &prob.params;
    let x0 = &prob.x0;
    let pc = Pieces::new(p.gamma, t_hat, a);
    let z = (-p.gamma * t_hat * (0.5 + pc.mean_a)).exp();
    let (s, c) = (p.omega * t_hat).sin_cos();
    let x1 = z * (x0.x1 * c + x0.x2 * s);
    let x2 = z * (x0.x2 * c - x0.x1 * s);
    let n = a.len();
    let mut x3 = x0.x3 * (-p.gamma * t_hat * (1.0 + 2.0 * pc.mean_a)).exp();
    for s in 0..n - 1 {
        x3 += pc.relax(s) * pc.carry(s);
    }
    x3 += pc.relax(n - 1);
    BlochState::raw(x1, x2, x3)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    /// Incoherent control active at `t`.
    pub n: f64,
}

/// Exact trajectory sampled `per_interval` times inside every interval (plus
/// the initial point).
pub fn stage1_trajectory(prob: &Stage1Problem, t_hat: f64, a: &[f64], per_interval: usize) -> Result<Vec<TrajectorySample>> {
    prob.check(t_hat, a)?;
    let p = &prob.params;
    let per = per_interval.max(1);
    let dt = t_hat / a.len() as f64;
    let h = dt / per as f64;
    let mut x = prob.x0;
    let mut out = Vec::with_capacity(a.len() * per + 1);
    out.push(TrajectorySample { t: 0.0, x1: x.x1, x2: x.x2, x3: x.x3, n: a[0] });
    for (k, &ak) in a.iter().enumerate() {
        let ck = 1.0 + 2.0 * ak;
        let start = x;
        for j in 1..=per {
            let tau = h * j as f64;
            let e = (-0.5 * p.gamma * ck * tau).exp();
            let (s, c) = (p.omega * tau).sin_cos();
            let decay = (-p.gamma * ck * tau).exp_m1();
            x = BlochState::raw(
                e * (start.x1 * c + start.x2 * s),
                e * (start.x2 * c - start.x1 * s),
                start.x3 + decay * (start.x3 - 1.0 / ck),
            );
            let t = if j == per { dt * (k + 1) as f64 } else { dt * k as f64 + tau };
            out.push(TrajectorySample { t, x1: x.x1, x2: x.x2, x3: x.x3, n: ak });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::quantum::OpenSystemParams;
    use rand::{Rng, SeedableRng};

    fn problem(x0: BlochState, n: usize) -> Stage1Problem {
        Stage1Problem::new(OpenSystemParams::default(), x0, BlochState::ORIGIN, 1.0, n).unwrap()
    }

    fn random_ball(rng: &mut impl Rng) -> BlochState {
        loop {
            let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let x = BlochState::from_array(v);
            if x.norm() <= 1.0 {
                return x;
            }
        }
    }

    #[test]
    fn constant_control_matches_corollary() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let x0 = random_ball(&mut rng);
            let n = rng.random_range(1..12);
            let p: f64 = rng.random_range(0.0..50.0);
            let t: f64 = rng.random_range(0.1..3000.0);
            let prob = problem(x0, n);
            let g = prob.params.gamma;
            let got = stage1_state(&prob, t, &vec![p; n]).unwrap();
            let e = (-g * t * (1.0 + 2.0 * p)).exp();
            let z = (-g * t * (0.5 + p)).exp();
            let want = BlochState::raw(
                z * (x0.x1 * t.cos() + x0.x2 * t.sin()),
                z * (x0.x2 * t.cos() - x0.x1 * t.sin()),
                x0.x3 * e + (1.0 - e) / (1.0 + 2.0 * p),
            );
            assert!(got.max_abs_diff(&want) < 1e-12, "{got:?} {want:?}");
        }
    }

    #[test]
    fn matches_ode_and_recurrence() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let prob = problem(BlochState::raw(0.3, -0.5, 0.6), 7);
        let a: Vec<f64> = (0..7).map(|_| rng.random_range(0.0..20.0)).collect();
        let t = 120.0;
        let got = stage1_state(&prob, t, &a).unwrap();
        let ode = oracle::stage1_rk4(&prob.params, &prob.x0, t, &a, 1e-3);
        assert!(got.max_abs_diff(&ode) < 1e-8);
        let rec = oracle::stage1_recurrence(&prob.params, &prob.x0, t, &a);
        assert!(got.max_abs_diff(&rec) < 1e-12);
    }

    #[test]
    fn single_interval_has_empty_sum() {
        let prob = problem(BlochState::raw(0.0, 0.0, -1.0), 1);
        let x = stage1_state(&prob, 10.0, &[16.205]).unwrap();
        assert!((x.x3 + 0.4981).abs() < 1e-4, "{}", x.x3);
        let g1 = x.distance_squared(&BlochState::raw(0.0, 0.0, -0.5));
        assert!((3e-6..5e-6).contains(&g1), "{g1}");
    }

    #[test]
    fn steady_state_limit() {
        let prob = problem(BlochState::raw(0.2, 0.1, -0.9), 3);
        let p = 2.5;
        let t = 1e4 / prob.params.gamma;
        let x = stage1_state(&prob, t, &[p; 3]).unwrap();
        assert!((x.x3 - 1.0 / (1.0 + 2.0 * p)).abs() < 1e-6);
        assert!(x.x1.abs() < 1e-300 && x.x2.abs() < 1e-300);
    }

    #[test]
    fn trajectory_ends_at_closed_form() {
        let prob = problem(BlochState::raw(1.0, 0.0, 0.0), 4);
        let a = [3.0, 0.0, 10.0, 1.0];
        let tr = stage1_trajectory(&prob, 40.0, &a, 25).unwrap();
        assert_eq!(tr.len(), 101);
        let end = tr.last().unwrap();
        let want = stage1_state(&prob, 40.0, &a).unwrap();
        assert!(BlochState::raw(end.x1, end.x2, end.x3).max_abs_diff(&want) < 1e-12);
        assert_eq!(end.t, 40.0);
    }
}
