//! `verify`: fast paths against the slow references in [`crate::oracle`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::output::Outputs;
use super::{seed, Outcome};
use crate::error::{Error, Result};
use crate::gate::{self, ClosedGateProblem};
use crate::linalg::Mat2;
use crate::oracle;
use crate::quantum::{bloch_to_density, density_to_bloch, eigenvalues_descending, BlochState, OpenSystemParams, PiecewiseConstantControl};
use crate::rng;
use crate::stage1::{stage1_gradient, stage1_state, Stage1Problem};
use crate::stage2::{adjoint_gradient_j2alpha, integrate_bloch, objective_j2alpha, sampled_inner, AdjointConfig};

pub const CHECKS: &[&str] = &[
    "zero_control_identity",
    "gate_gradient_fd",
    "propagator_expm",
    "zero_control_stationarity",
    "stage1_closed_form_rk4",
    "stage1_recurrence",
    "stage1_gradient_fd",
    "integrator_closed_form",
    "adjoint_fd",
    "round_trip",
];

/// Size of the perturbation the fault hook adds to the closed-form `x₃`.
const FAULT: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Largest error seen (absolute or relative, see `detail`).
    pub max_error: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub fault_injected: bool,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

struct Ctx {
    seed: u64,
    fault: bool,
    params: OpenSystemParams,
}

impl Ctx {
    fn rng(&self, check: usize) -> rng::Rng {
        rng::stream(self.seed, 1000 + check as u64, 0)
    }

    /// Closed-form stage-1 state, shifted when the fault hook is on.
    fn closed_form(&self, prob: &Stage1Problem, t: f64, a: &[f64]) -> Result<BlochState> {
        let mut x = stage1_state(prob, t, a)?;
        if self.fault {
            x.x3 += FAULT;
        }
        Ok(x)
    }

    fn random_stage1(&self, r: &mut rng::Rng) -> Result<(Stage1Problem, Vec<f64>)> {
        let x0 = random_ball_point(r);
        let target = random_ball_point(r);
        let n = r.random_range(1..=12);
        let t_hat = r.random_range(5.0..60.0);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.0..8.0)).collect();
        Ok((Stage1Problem::new(self.params, x0, target, t_hat, n)?, a))
    }
}

fn random_ball_point(r: &mut rng::Rng) -> BlochState {
    loop {
        let x = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
            return BlochState::from_array(x);
        }
    }
}

fn random_gate(r: &mut rng::Rng) -> Result<(ClosedGateProblem, PiecewiseConstantControl)> {
    let phi = r.random_range(PI / 20.0..=9.0 * PI / 20.0);
    let t = r.random_range(PI / 20.0..=PI / 2.0);
    let n = r.random_range(1..=10);
    let a: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
    Ok((ClosedGateProblem::new(phi, t, n)?, PiecewiseConstantControl::new(t, a)?))
}

fn result(name: &str, max_error: f64, tolerance: f64, samples: usize, detail: &str) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        passed: max_error <= tolerance,
        max_error,
        tolerance,
        samples,
        detail: detail.to_string(),
    }
}

fn run_check(ctx: &Ctx, idx: usize) -> Result<CheckResult> {
    let name = CHECKS[idx];
    let mut r = ctx.rng(idx);
    let mut worst = 0.0f64;
    let res = match name {
        "zero_control_identity" => {
            let m = 1000;
            for _ in 0..m {
                let phi = r.random_range(PI / 20.0..=9.0 * PI / 20.0);
                let t = r.random_range(PI / 20.0..=PI / 2.0);
                let n = r.random_range(1..=10);
                let p = ClosedGateProblem::new(phi, t, n)?;
                let j = gate::objective_jw(&p, &PiecewiseConstantControl::zeros(t, n)?)?;
                worst = worst.max((j - (phi + t).cos().powi(2)).abs());
            }
            result(name, worst, 1e-12, m, "|J_W(0) - cos^2(phi_W + T)|")
        }
        "gate_gradient_fd" => {
            let m = 20;
            for _ in 0..m {
                let (p, c) = random_gate(&mut r)?;
                let g = gate::gradient_jw(&p, &c)?;
                let f = |a: &[f64]| gate::objective_jw(&p, &PiecewiseConstantControl::new(p.duration, a.to_vec()).unwrap()).unwrap();
                let fd = oracle::central_gradient(f, &c.amplitudes, 1e-6);
                for (x, y) in g.iter().zip(&fd) {
                    worst = worst.max(oracle::rel_err(*x, *y, 1e-6));
                }
            }
            result(name, worst, 1e-6, m, "relative error of dJ_W/da_k vs central differences")
        }
        "propagator_expm" => {
            let m = 200;
            for _ in 0..m {
                let a: f64 = r.random_range(-50.0..50.0);
                let dt: f64 = r.random_range(1e-3..1.0);
                let h = Mat2::sigma_z() + Mat2::sigma_x().scale_re(a);
                let want = oracle::expm(&h.scale(Complex64::new(0.0, -dt)));
                worst = worst.max(gate::step_propagator(a, dt).matrix().max_abs_diff(&want));
            }
            result(name, worst, 1e-12, m, "max entry error of the step propagator vs the matrix exponential")
        }
        "zero_control_stationarity" => {
            let m = 20;
            for _ in 0..m {
                let (p, _) = random_gate(&mut r)?;
                let g = gate::gradient_jw(&p, &PiecewiseConstantControl::zeros(p.duration, p.intervals)?)?;
                worst = worst.max(g.iter().fold(0.0f64, |s, v| s.max(v.abs())));
                worst = worst.max(gate::pmp_residual_at_zero(&p, 100).max());
            }
            result(name, worst, 1e-10, m, "gradient and switching-function residuals at v = 0")
        }
        "stage1_closed_form_rk4" => {
            let m = 20;
            for _ in 0..m {
                let (p, a) = ctx.random_stage1(&mut r)?;
                let x = ctx.closed_form(&p, p.t_hat, &a)?;
                worst = worst.max(x.max_abs_diff(&oracle::stage1_rk4(&p.params, &p.x0, p.t_hat, &a, 1e-3)));
            }
            result(name, worst, 1e-9, m, "closed-form stage-1 state vs RK4")
        }
        "stage1_recurrence" => {
            let m = 100;
            for _ in 0..m {
                let (p, a) = ctx.random_stage1(&mut r)?;
                let x = ctx.closed_form(&p, p.t_hat, &a)?;
                worst = worst.max(x.max_abs_diff(&oracle::stage1_recurrence(&p.params, &p.x0, p.t_hat, &a)));
            }
            result(name, worst, 1e-12, m, "closed-form stage-1 state vs interval recurrence")
        }
        "stage1_gradient_fd" => {
            let m = 20;
            for _ in 0..m {
                let (p, a) = ctx.random_stage1(&mut r)?;
                let p = p.with_p_prime(3.0);
                let j = stage1_gradient(&p, p.t_hat, &a)?;
                let g1 = |x: &[f64]| stage1_state(&p, p.t_hat, x).unwrap().distance_squared(&p.x_tilde);
                for (x, y) in j.dg1_da.iter().zip(oracle::central_gradient(g1, &a, 1e-6)) {
                    worst = worst.max(oracle::rel_err(*x, y, 1e-6));
                }
                let gphi = |t: f64| t + p.p_prime * stage1_state(&p, t, &a).unwrap().distance_squared(&p.x_tilde);
                worst = worst.max(oracle::rel_err(j.dgphi_dt, oracle::central_derivative(gphi, p.t_hat, 1e-5), 1e-6));
            }
            result(name, worst, 1e-6, m, "relative error of dg1/da and dg_phi/dt vs central differences")
        }
        "integrator_closed_form" => {
            let m = 5;
            for _ in 0..m {
                let (p, a) = ctx.random_stage1(&mut r)?;
                let dt = p.t_hat / a.len() as f64;
                let mut x = p.x0;
                for (k, &n) in a.iter().enumerate() {
                    let span = (k as f64 * dt, (k + 1) as f64 * dt);
                    x = integrate_bloch(&p.params, &x, |_| 0.0, |_| n, span, 1e-3, usize::MAX)?.last();
                }
                worst = worst.max(x.max_abs_diff(&ctx.closed_form(&p, p.t_hat, &a)?));
            }
            result(name, worst, 1e-9, m, "Bloch integrator with v = 0 vs the closed-form state")
        }
        "adjoint_fd" => {
            let x0 = random_ball_point(&mut r);
            let xt = random_ball_point(&mut r);
            let samples = 1000;
            let v: Vec<f64> = (0..=samples).map(|i| -50.0 * (2.0 * PI * i as f64 / samples as f64).sin()).collect();
            let cfg = AdjointConfig { alpha: 1e-3, b: 1.0, start: 0.0, end: 5.0 };
            let grad = adjoint_gradient_j2alpha(&ctx.params, &x0, &xt, &v, &cfg)?;
            let m = 5;
            for _ in 0..m {
                let modes: Vec<(f64, f64)> = (1..=5).map(|_| (r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
                let dir: Vec<f64> = (0..=samples)
                    .map(|i| {
                        let s = PI * i as f64 / samples as f64;
                        modes.iter().enumerate().map(|(k, (a, b))| a * ((k + 1) as f64 * s).sin() + b * ((k + 1) as f64 * s).cos()).sum()
                    })
                    .collect();
                let shifted = |s: f64| v.iter().zip(&dir).map(|(a, b)| a + s * b).collect::<Vec<_>>();
                let h = 1e-5;
                let fd = (objective_j2alpha(&ctx.params, &x0, &xt, &shifted(h), &cfg)? - objective_j2alpha(&ctx.params, &x0, &xt, &shifted(-h), &cfg)?)
                    / (2.0 * h);
                worst = worst.max(oracle::rel_err(sampled_inner(&grad, &dir, &cfg), fd, 1e-12));
            }
            result(name, worst, 1e-4, m, "relative error of adjoint directional derivatives vs central differences")
        }
        "round_trip" => {
            let m = 1000;
            for _ in 0..m {
                let x = random_ball_point(&mut r);
                let rho = bloch_to_density(&x)?;
                worst = worst.max(density_to_bloch(&rho).max_abs_diff(&x));
                let p = eigenvalues_descending(&rho);
                let tr = rho.matrix().trace();
                worst = worst.max((tr.re - 1.0).abs()).max(tr.im.abs());
                worst = worst.max((p.p1 - p.p2 - x.norm()).abs());
            }
            result(name, worst, 1e-14, m, "Bloch -> density -> Bloch, trace and spectrum")
        }
        other => unreachable!("unknown check {other}"),
    };
    Ok(res)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let seed = seed(cfg)?;
    let names = cfg.words("verify.checks", CHECKS)?;
    let fault = cfg.flag("verify.inject_fault", false)?;
    let params = cfg.open_params()?;
    cfg.finish()?;
    let mut selected = Vec::new();
    for n in &names {
        let i = CHECKS
            .iter()
            .position(|c| c == n)
            .ok_or_else(|| Error::Config(format!("unknown check `{n}` (known: {})", CHECKS.join(", "))))?;
        selected.push(i);
    }
    let ctx = Ctx { seed, fault, params };
    let checks = selected.iter().map(|&i| run_check(&ctx, i)).collect::<Result<Vec<_>>>()?;
    let log: Vec<String> = checks
        .iter()
        .map(|c| format!("{} {}: {:.3e} (tol {:.0e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.max_error, c.tolerance))
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("{} check(s) failed: {}", failed.len(), failed.join(", ")));
    let report = VerifyReport {
        seed,
        fault_injected: fault,
        passed: failed.is_empty(),
        checks,
    };
    let mut outputs = Outputs::default();
    outputs.json("verify_report.json", &report)?;
    Ok(Outcome { outputs, log, failure })
}
