//! Regularized terminal objective
//! `J(v) = ‖x(T) − x_target‖² + α ∫ v²/S dt`, with the window
//! `S(t) = exp(−b (s − 1/2)²)`, `s = (t − t̂)/(T − t̂)`, and its functional
//! derivative by the adjoint method.
//!
//! Controls are sampled on a uniform grid over `[t̂, T]` and interpolated
//! linearly between samples. The costate is normalized as the
//! anti-gradient, `p(T) = −2(x(T) − x_target)`, so that
//! `δJ/δv = −2μ(p₃x₂ − p₂x₃) + 2αv/S` and `v ← v − β δJ/δv` is a descent
//! step.

use serde::Serialize;

use super::integrate::rk4_step;
use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointConfig {
    pub alpha: f64,
    pub b: f64,
    pub start: f64,
    pub end: f64,
}

impl AdjointConfig {
    pub fn validate(&self, samples: usize) -> Result<()> {
        if !(self.alpha >= 0.0) || !(self.b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need α ≥ 0 and b > 0 (got α = {}, b = {})",
                self.alpha, self.b
            )));
        }
        if !(self.end > self.start) {
            return Err(Error::InvalidParameter("empty control window".into()));
        }
        if samples < 2 {
            return Err(Error::InvalidControl("need at least two control samples".into()));
        }
        Ok(())
    }

    /// `S` at sample `i` of `m + 1`.
    fn window(&self, i: usize, m: usize) -> f64 {
        let s = i as f64 / m as f64 - 0.5;
        (-self.b * s * s).exp()
    }
}

/// Trapezoid weights of the uniform grid.
fn weights(m: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..=m).map(move |i| if i == 0 || i == m { 0.5 * h } else { h })
}

fn forward(params: &OpenSystemParams, x_init: &BlochState, v: &[f64], h: f64) -> Vec<[f64; 3]> {
    let mut xs = Vec::with_capacity(v.len());
    let mut x = x_init.to_array();
    xs.push(x);
    for w in v.windows(2) {
        x = rk4_step(params, x, h, [w[0], 0.5 * (w[0] + w[1]), w[1]], [0.0; 3]);
        xs.push(x);
    }
    xs
}

fn control_energy(v: &[f64], cfg: &AdjointConfig) -> f64 {
    let m = v.len() - 1;
    let h = (cfg.end - cfg.start) / m as f64;
    weights(m, h)
        .zip(v)
        .enumerate()
        .map(|(i, (w, vi))| w * vi * vi / cfg.window(i, m))
        .sum()
}

pub fn objective_j2alpha(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, v: &[f64], cfg: &AdjointConfig) -> Result<f64> {
    cfg.validate(v.len())?;
    let h = (cfg.end - cfg.start) / (v.len() - 1) as f64;
    let xt = *forward(params, x_init, v, h).last().unwrap();
    let terminal = BlochState::from_array(xt).distance_squared(x_target);
    if cfg.alpha == 0.0 {
        return Ok(terminal);
    }
    Ok(terminal + cfg.alpha * control_energy(v, cfg))
}

/// Costate right-hand side, `ṗ = −(Aᵀ + v (B^v)ᵀ) p` with `n = 0`.
fn costate_rhs(params: &OpenSystemParams, v: f64, p: &[f64; 3]) -> [f64; 3] {
    let g = params.gamma;
    let w = params.omega;
    let m2 = 2.0 * params.mu * v;
    [
        0.5 * g * p[0] + w * p[1],
        -w * p[0] + 0.5 * g * p[1] - m2 * p[2],
        m2 * p[1] + g * p[2],
    ]
}

fn costate_step(params: &OpenSystemParams, p: [f64; 3], h: f64, v: [f64; 3]) -> [f64; 3] {
    let add = |x: &[f64; 3], k: &[f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
    let k1 = costate_rhs(params, v[0], &p);
    let k2 = costate_rhs(params, v[1], &add(&p, &k1, 0.5 * h));
    let k3 = costate_rhs(params, v[1], &add(&p, &k2, 0.5 * h));
    let k4 = costate_rhs(params, v[2], &add(&p, &k3, h));
    [
        p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        p[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Samples of `δJ/δv` on the control grid.
pub fn adjoint_gradient_j2alpha(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, v: &[f64], cfg: &AdjointConfig) -> Result<Vec<f64>> {
    cfg.validate(v.len())?;
    let m = v.len() - 1;
    let h = (cfg.end - cfg.start) / m as f64;
    let xs = forward(params, x_init, v, h);
    let xt = xs[m];
    let mut p = [
        -2.0 * (xt[0] - x_target.x1),
        -2.0 * (xt[1] - x_target.x2),
        -2.0 * (xt[2] - x_target.x3),
    ];
    let mu2 = 2.0 * params.mu;
    let mut grad = vec![0.0; m + 1];
    for i in (0..=m).rev() {
        let x = &xs[i];
        let mut g = -mu2 * (p[2] * x[1] - p[1] * x[2]);
        if cfg.alpha != 0.0 {
            g += 2.0 * cfg.alpha * v[i] / cfg.window(i, m);
        }
        grad[i] = g;
        if i > 0 {
            let (vr, vl) = (v[i], v[i - 1]);
            p = costate_step(params, p, -h, [vr, 0.5 * (vl + vr), vl]);
        }
    }
    Ok(grad)
}

/// Trapezoid inner product `∫ f g dt` of two sampled functions on the
/// control grid.
pub fn sampled_inner(f: &[f64], g: &[f64], cfg: &AdjointConfig) -> f64 {
    let m = f.len() - 1;
    let h = (cfg.end - cfg.start) / m as f64;
    weights(m, h).zip(f.iter().zip(g)).map(|(w, (a, b))| w * a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};

    fn setup() -> (OpenSystemParams, BlochState, BlochState) {
        (OpenSystemParams::default(), BlochState::raw(0.0, 0.0, 0.5), BlochState::raw(0.0, 0.0, -0.5))
    }

    #[test]
    fn zero_control_is_free_decay() {
        let (p, x0, xt) = setup();
        let cfg = AdjointConfig { alpha: 0.3, b: 2.0, start: 450.0, end: 455.0 };
        let j = objective_j2alpha(&p, &x0, &xt, &[0.0; 501], &cfg).unwrap();
        let free = oracle::coherent_rk4(&p, &x0, |_| 0.0, 450.0, 455.0, 1e-3).distance_squared(&xt);
        assert!((j - free).abs() < 1e-12);
    }

    #[test]
    fn penalty_term_is_linear_in_alpha() {
        let (p, x0, xt) = setup();
        let v: Vec<f64> = (0..=200).map(|i| 40.0 * (i as f64 * 0.05).sin()).collect();
        let mk = |alpha| AdjointConfig { alpha, b: 1.5, start: 0.0, end: 4.0 };
        let j0 = objective_j2alpha(&p, &x0, &xt, &v, &mk(0.0)).unwrap();
        let j1 = objective_j2alpha(&p, &x0, &xt, &v, &mk(1e-3)).unwrap();
        let j2 = objective_j2alpha(&p, &x0, &xt, &v, &mk(2e-3)).unwrap();
        assert!(((j2 - j0) - 2.0 * (j1 - j0)).abs() < 1e-12);
    }

    #[test]
    fn forward_pass_matches_oracle_integration() {
        let (p, x0, _) = setup();
        let m = 2000;
        let v: Vec<f64> = (0..=m).map(|i| 50.0 * (i as f64 / m as f64 * 7.0).cos()).collect();
        let interp = |t: f64| {
            let s = t / 5.0 * m as f64;
            let i = (s.floor() as usize).min(m - 1);
            v[i] + (s - i as f64) * (v[i + 1] - v[i])
        };
        let xs = forward(&p, &x0, &v, 5.0 / m as f64);
        let want = oracle::coherent_rk4(&p, &x0, interp, 0.0, 5.0, 1e-4);
        assert!(BlochState::from_array(xs[m]).max_abs_diff(&want) < 1e-8);
    }

    #[test]
    fn directional_derivatives_match() {
        let (p, x0, xt) = setup();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let m = 2000;
        let v: Vec<f64> = (0..=m).map(|i| -60.0 * (std::f64::consts::PI * 2.0 * i as f64 / m as f64).sin() + 5.0 * (i as f64 * 0.013).cos()).collect();
        for alpha in [0.0, 1e-4, 1e-2] {
            let cfg = AdjointConfig { alpha, b: 1.0, start: 450.0, end: 455.0 };
            let grad = adjoint_gradient_j2alpha(&p, &x0, &xt, &v, &cfg).unwrap();
            for _ in 0..5 {
                // Smooth random direction: a few low modes with random weights.
                let modes: Vec<(f64, f64)> = (1..=6).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                let dir: Vec<f64> = (0..=m)
                    .map(|i| {
                        let s = std::f64::consts::PI * i as f64 / m as f64;
                        modes.iter().enumerate().map(|(k, (a, b))| a * ((k + 1) as f64 * s).sin() + b * ((k + 1) as f64 * s).cos()).sum()
                    })
                    .collect();
                let eps = 1e-5;
                let shifted = |s: f64| v.iter().zip(&dir).map(|(a, b)| a + s * b).collect::<Vec<_>>();
                let fd = (objective_j2alpha(&p, &x0, &xt, &shifted(eps), &cfg).unwrap()
                    - objective_j2alpha(&p, &x0, &xt, &shifted(-eps), &cfg).unwrap())
                    / (2.0 * eps);
                let ad = sampled_inner(&grad, &dir, &cfg);
                assert!(oracle::rel_err(ad, fd, 1e-12) < 1e-4, "α={alpha}: {ad} vs {fd}");
            }
        }
    }

    #[test]
    fn degenerate_cases() {
        let (p, x0, xt) = setup();
        let cfg = AdjointConfig { alpha: 0.5, b: 1.0, start: 0.0, end: 2.0 };
        // At v = 0 the regularizer contributes nothing.
        let g_reg = adjoint_gradient_j2alpha(&p, &x0, &xt, &[0.0; 101], &cfg).unwrap();
        let g_free = adjoint_gradient_j2alpha(&p, &x0, &xt, &[0.0; 101], &AdjointConfig { alpha: 0.0, ..cfg }).unwrap();
        assert_eq!(g_reg, g_free);
        // Start on the endpoint of the free trajectory: p(T) = 0.
        let end = BlochState::from_array(*forward(&p, &x0, &[0.0; 101], 0.02).last().unwrap());
        let g = adjoint_gradient_j2alpha(&p, &x0, &end, &[0.0; 101], &cfg).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }
}
