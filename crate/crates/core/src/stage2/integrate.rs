use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

/// Sampled solution of the Bloch equations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl Trajectory {
    pub fn last(&self) -> BlochState {
        *self.states.last().expect("trajectory has at least the initial point")
    }
}

#[inline]
pub(crate) fn rhs(p: &OpenSystemParams, v: f64, n: f64, x: &[f64; 3]) -> [f64; 3] {
    let relax = p.gamma * (1.0 + 2.0 * n);
    let mv = 2.0 * p.mu * v;
    [
        -0.5 * relax * x[0] + p.omega * x[1],
        -p.omega * x[0] - 0.5 * relax * x[1] - mv * x[2],
        mv * x[1] - relax * x[2] + p.gamma,
    ]
}

/// One RK4 step given the controls at the start, midpoint and end.
#[inline]
pub(crate) fn rk4_step(p: &OpenSystemParams, x: [f64; 3], h: f64, v: [f64; 3], n: [f64; 3]) -> [f64; 3] {
    let add = |x: &[f64; 3], k: &[f64; 3], s: f64| [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2]];
    let k1 = rhs(p, v[0], n[0], &x);
    let k2 = rhs(p, v[1], n[1], &add(&x, &k1, 0.5 * h));
    let k3 = rhs(p, v[1], n[1], &add(&x, &k2, 0.5 * h));
    let k4 = rhs(p, v[2], n[2], &add(&x, &k3, h));
    [
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        x[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Classic RK4 for `ẋ = (A + v B^v + n B^n) x + d` on `[t0, t1]`.
///
/// The span is split into `⌈(t1 − t0)/step⌉` equal steps and every
/// `sample_every`-th state is kept, always including both ends.
pub fn integrate_bloch(
    params: &OpenSystemParams,
    x_init: &BlochState,
    v: impl Fn(f64) -> f64,
    n: impl Fn(f64) -> f64,
    span: (f64, f64),
    step: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("integration step {step} must be > 0")));
    }
    let (t0, t1) = span;
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!("empty span [{t0}, {t1}]")));
    }
    let steps = ((t1 - t0) / step - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { (t1 - t0) / steps as f64 };
    let every = sample_every.max(1);
    let eval = |f: &dyn Fn(f64) -> f64, t: f64, what: &str| {
        let y = f(t);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite(format!("{what} control at t = {t}")))
        }
    };

    let mut x = x_init.to_array();
    let mut times = vec![t0];
    let mut states = vec![*x_init];
    let mut vl = eval(&v, t0, "coherent")?;
    let mut nl = eval(&n, t0, "incoherent")?;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let tn = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
        let vm = eval(&v, t + 0.5 * h, "coherent")?;
        let nm = eval(&n, t + 0.5 * h, "incoherent")?;
        let vr = eval(&v, tn, "coherent")?;
        let nr = eval(&n, tn, "incoherent")?;
        x = rk4_step(params, x, h, [vl, vm, vr], [nl, nm, nr]);
        (vl, nl) = (vr, nr);
        if (i + 1) % every == 0 || i + 1 == steps {
            times.push(tn);
            states.push(BlochState::from_array(x));
        }
    }
    Ok(Trajectory { times, states })
}
