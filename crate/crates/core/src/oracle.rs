//! Independent reference computations used to cross-check the fast paths.
//!
//! Nothing here calls into the closed-form or propagator code it is meant to
//! check: the integrators, the matrix exponential and the interval
//! recurrences are all written out from the equations of motion.

use num_complex::Complex64;

use crate::linalg::Mat2;
use crate::quantum::{BlochState, OpenSystemParams, PiecewiseConstantControl};

/// `exp(M)` by scaling and squaring with a degree-24 Taylor polynomial.
pub fn expm(m: &Mat2) -> Mat2 {
    let norm = m.norm();
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m.scale_re(scale);
    let mut term = Mat2::identity();
    let mut sum = Mat2::identity();
    for k in 1..=24 {
        term = (term * a).scale_re(1.0 / k as f64);
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn rk4<const D: usize>(f: impl Fn(f64, &[f64; D]) -> [f64; D], t: f64, x: [f64; D], h: f64) -> [f64; D] {
    let shift = |x: &[f64; D], k: &[f64; D], s: f64| {
        let mut y = *x;
        for i in 0..D {
            y[i] += s * k[i];
        }
        y
    };
    let k1 = f(t, &x);
    let k2 = f(t + h / 2.0, &shift(&x, &k1, h / 2.0));
    let k3 = f(t + h / 2.0, &shift(&x, &k2, h / 2.0));
    let k4 = f(t + h, &shift(&x, &k3, h));
    let mut y = x;
    for i in 0..D {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    y
}

/// Integrates `f` over `[t0, t0 + len]` with steps no longer than `h`.
fn rk4_span<const D: usize>(f: &impl Fn(f64, &[f64; D]) -> [f64; D], t0: f64, len: f64, x: [f64; D], h: f64) -> [f64; D] {
    let steps = (len / h).ceil().max(1.0) as usize;
    let hh = len / steps as f64;
    let mut y = x;
    for i in 0..steps {
        y = rk4(f, t0 + i as f64 * hh, y, hh);
    }
    y
}

/// `U(T)` for `dU/dt = −i(σ_z + v σ_x) U` by RK4 on the 8 real entries.
pub fn schrodinger_rk4(ctrl: &PiecewiseConstantControl, h: f64) -> Mat2 {
    let dt = ctrl.dt();
    let mut y = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    for &v in &ctrl.amplitudes {
        let f = |_t: f64, y: &[f64; 8]| {
            let u = [
                Complex64::new(y[0], y[1]),
                Complex64::new(y[2], y[3]),
                Complex64::new(y[4], y[5]),
                Complex64::new(y[6], y[7]),
            ];
            let mi = Complex64::new(0.0, -1.0);
            // −i [[1, v], [v, −1]] U
            let d = [
                mi * (u[0] + v * u[2]),
                mi * (u[1] + v * u[3]),
                mi * (v * u[0] - u[2]),
                mi * (v * u[1] - u[3]),
            ];
            [d[0].re, d[0].im, d[1].re, d[1].im, d[2].re, d[2].im, d[3].re, d[3].im]
        };
        y = rk4_span(&f, 0.0, dt, y, h);
    }
    Mat2::new(
        Complex64::new(y[0], y[1]),
        Complex64::new(y[2], y[3]),
        Complex64::new(y[4], y[5]),
        Complex64::new(y[6], y[7]),
    )
}

/// Realified system `ẋ = (A + B v) x`, `x(0) = (1, 0, 0, 0)`, sampled at the
/// interval boundaries.
pub fn realified_rk4(ctrl: &PiecewiseConstantControl, h: f64) -> Vec<[f64; 4]> {
    let dt = ctrl.dt();
    let mut x = [1.0, 0.0, 0.0, 0.0];
    let mut out = vec![x];
    for &v in &ctrl.amplitudes {
        let f = |_t: f64, x: &[f64; 4]| {
            [
                x[1] + v * x[3],
                -x[0] + v * x[2],
                x[3] - v * x[1],
                -x[2] - v * x[0],
            ]
        };
        x = rk4_span(&f, 0.0, dt, x, h);
        out.push(x);
    }
    out
}

/// Right-hand side of the Bloch equations with coherent `v` and incoherent `n`.
pub fn bloch_rhs(p: &OpenSystemParams, v: f64, n: f64, x: &[f64; 3]) -> [f64; 3] {
    let g = p.gamma;
    let m2 = 2.0 * p.mu;
    [
        -0.5 * g * (1.0 + 2.0 * n) * x[0] + p.omega * x[1],
        -p.omega * x[0] - 0.5 * g * (1.0 + 2.0 * n) * x[1] - m2 * v * x[2],
        m2 * v * x[1] - g * (1.0 + 2.0 * n) * x[2] + g,
    ]
}

/// Bloch equations with `v = 0` under piecewise constant `n`, RK4 with steps
/// aligned to the interval boundaries.
pub fn stage1_rk4(p: &OpenSystemParams, x0: &BlochState, t_hat: f64, a: &[f64], h: f64) -> BlochState {
    let dt = t_hat / a.len() as f64;
    let mut x = x0.to_array();
    for &n in a {
        let f = |_t: f64, x: &[f64; 3]| bloch_rhs(p, 0.0, n, x);
        x = rk4_span(&f, 0.0, dt, x, h);
    }
    BlochState::from_array(x)
}

/// Bloch equations with time-dependent coherent control and `n = 0`.
pub fn coherent_rk4(p: &OpenSystemParams, x0: &BlochState, v: impl Fn(f64) -> f64, t0: f64, t1: f64, h: f64) -> BlochState {
    let f = |t: f64, x: &[f64; 3]| bloch_rhs(p, v(t), 0.0, x);
    BlochState::from_array(rk4_span(&f, t0, t1 - t0, x0.to_array(), h))
}

/// Interval-by-interval difference equations for piecewise constant `n`.
pub fn stage1_recurrence(p: &OpenSystemParams, x0: &BlochState, t_hat: f64, a: &[f64]) -> BlochState {
    let dt = t_hat / a.len() as f64;
    let (s, c) = (p.omega * dt).sin_cos();
    let (mut x1, mut x2, mut x3) = (x0.x1, x0.x2, x0.x3);
    for &ak in a {
        let e1 = (-p.gamma * dt * (1.0 + 2.0 * ak) / 2.0).exp();
        let e2 = (-p.gamma * dt * (1.0 + 2.0 * ak)).exp();
        let (n1, n2) = (e1 * (x1 * c + x2 * s), e1 * (x2 * c - x1 * s));
        x1 = n1;
        x2 = n2;
        x3 = e2 * x3 + (1.0 - e2) / (1.0 + 2.0 * ak);
    }
    BlochState::raw(x1, x2, x3)
}

/// Central-difference gradient.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|i| {
            y[i] = x[i] + h;
            let up = f(&y);
            y[i] = x[i] - h;
            let down = f(&y);
            y[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Central difference of a scalar function.
pub fn central_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `|a − b| / max(|b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}
