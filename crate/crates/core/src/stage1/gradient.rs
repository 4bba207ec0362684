use serde::Serialize;

use super::closed_form::{state_unchecked, Pieces};
use super::Stage1Problem;
use crate::error::Result;
use crate::quantum::BlochState;

/// Partial derivatives of the closed-form final state and the objectives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage1Jacobian {
    pub state: BlochState,
    /// `dx_da[q] = ∂x/∂a_q`.
    pub dx_da: Vec<[f64; 3]>,
    pub dx_dt: [f64; 3],
    pub dg1_da: Vec<f64>,
    pub dgphi_da: Vec<f64>,
    pub dgphi_dt: f64,
}

/// Analytic partials of `x(t̂, a)`, `g₁` and `g_Φ`.
///
/// For `x₃` the amplitude derivative at `q` has three parts: the decay of
/// the initial value, the change of interval `q`'s own relaxation term, and
/// the extra damping `q` imposes on every earlier interval's contribution.
pub fn stage1_gradient(prob: &Stage1Problem, t_hat: f64, a: &[f64]) -> Result<Stage1Jacobian> {
    prob.check(t_hat, a)?;
    let p = &prob.params;
    let x0 = &prob.x0;
    let n = a.len();
    let nf = n as f64;
    let g = p.gamma;
    let pc = Pieces::new(g, t_hat, a);
    let state = state_unchecked(prob, t_hat, a);

    let z = (-g * t_hat * (0.5 + pc.mean_a)).exp();
    let (s, c) = (p.omega * t_hat).sin_cos();
    let u1 = x0.x1 * c + x0.x2 * s;
    let u2 = x0.x2 * c - x0.x1 * s;
    let d12 = -g * t_hat / nf * z;
    let init3 = x0.x3 * (-g * t_hat * (1.0 + 2.0 * pc.mean_a)).exp();

    // H(q) = −(2γt̂/N) Σ_{s<q} relax_s carry_s, built as a running prefix.
    let mut prefix = 0.0;
    let mut dx_da = Vec::with_capacity(n);
    for q in 0..n {
        let cq = pc.c[q];
        let eq = (-pc.kappa * cq).exp();
        let d = -2.0 * pc.relax(q) / cq + 2.0 * g * t_hat * eq / (cq * nf);
        let h = -2.0 * g * t_hat / nf * prefix;
        let w = if q == 0 {
            d * pc.carry(0)
        } else if q < n - 1 {
            h + d * pc.carry(q)
        } else {
            h + d
        };
        let dx3 = -2.0 * g * t_hat / nf * init3 + w;
        dx_da.push([d12 * u1, d12 * u2, dx3]);
        if q < n - 1 {
            prefix += pc.relax(q) * pc.carry(q);
        }
    }

    let rate = g * (0.5 + pc.mean_a);
    let dx1_dt = z * (-rate * u1 - x0.x1 * p.omega * s + x0.x2 * p.omega * c);
    let dx2_dt = z * (-rate * u2 - x0.x2 * p.omega * s - x0.x1 * p.omega * c);
    let mut dx3_dt = -g * (1.0 + 2.0 * pc.mean_a) * init3;
    for s in 0..n - 1 {
        let cs = pc.c[s];
        let es = (-pc.kappa * cs).exp();
        dx3_dt += g / (cs * nf) * pc.carry(s) * (cs * es + (es - 1.0) * pc.tail[s]);
    }
    dx3_dt += g / nf * (-pc.kappa * pc.c[n - 1]).exp();
    let dx_dt = [dx1_dt, dx2_dt, dx3_dt];

    let r = state.sub(&prob.x_tilde);
    let inner = |v: &[f64; 3]| r[0] * v[0] + r[1] * v[1] + r[2] * v[2];
    let dg1_da: Vec<f64> = dx_da.iter().map(|v| 2.0 * inner(v)).collect();
    let dgphi_da = dg1_da.iter().map(|v| prob.p_prime * v).collect();
    let dgphi_dt = if prob.p_prime == 0.0 {
        1.0
    } else {
        1.0 + 2.0 * prob.p_prime * inner(&dx_dt)
    };

    Ok(Stage1Jacobian {
        state,
        dx_da,
        dx_dt,
        dg1_da,
        dgphi_da,
        dgphi_dt,
    })
}
