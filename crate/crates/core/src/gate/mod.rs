//! Closed two-level system `dU/dt = −i(σ_z + v σ_x) U` and the phase gate
//! objective `J_W = |Tr(W† U(T))|² / 4` with `W = exp(iφ σ_z)`.

mod grape;

pub use grape::{grape_maximize, grape_maximize_with, GrapeOptions};

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, I};
use crate::quantum::PiecewiseConstantControl;

/// One instance of the gate problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedGateProblem {
    /// Gate phase φ in `(0, π/2)`.
    pub phi_w: f64,
    /// Final time in `(0, π/2]`.
    pub duration: f64,
    pub intervals: usize,
    /// Optional bound `|a_k| ≤ ν`.
    pub amplitude_bound: Option<f64>,
}

impl ClosedGateProblem {
    pub fn new(phi_w: f64, duration: f64, intervals: usize) -> Result<Self> {
        if !(phi_w > 0.0 && phi_w < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "gate phase {phi_w} outside (0, π/2)"
            )));
        }
        if !(duration > 0.0 && duration <= FRAC_PI_2 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "final time {duration} outside (0, π/2]"
            )));
        }
        if intervals == 0 {
            return Err(Error::InvalidParameter("need N ≥ 1 intervals".into()));
        }
        Ok(ClosedGateProblem {
            phi_w,
            duration,
            intervals,
            amplitude_bound: None,
        })
    }

    pub fn with_bound(mut self, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("amplitude bound {nu} must be > 0")));
        }
        self.amplitude_bound = Some(nu);
        Ok(self)
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.intervals as f64
    }

    /// `W = exp(iφ σ_z)`.
    pub fn target(&self) -> Mat2 {
        Mat2::diag(
            Complex64::from_polar(1.0, self.phi_w),
            Complex64::from_polar(1.0, -self.phi_w),
        )
    }

    /// `J_W` of the zero control, `cos²(φ + T)`.
    pub fn zero_control_value(&self) -> f64 {
        (self.phi_w + self.duration).cos().powi(2)
    }

    fn check(&self, ctrl: &PiecewiseConstantControl) -> Result<()> {
        check_amplitudes(self, &ctrl.amplitudes)?;
        if (ctrl.duration - self.duration).abs() > 1e-12 * self.duration.max(1.0) {
            return Err(Error::DurationMismatch {
                expected: self.duration,
                got: ctrl.duration,
            });
        }
        Ok(())
    }
}

fn check_amplitudes(prob: &ClosedGateProblem, a: &[f64]) -> Result<()> {
    if a.len() != prob.intervals {
        return Err(Error::IntervalMismatch {
            expected: prob.intervals,
            got: a.len(),
        });
    }
    Ok(())
}

/// A 2×2 matrix checked to be unitary within `1e-10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryMatrix(Mat2);

impl UnitaryMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        let det = (m.det().norm() - 1.0).abs();
        if defect > Self::TOL || det > Self::TOL {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (defect {defect:e}, |det| − 1 = {det:e})"
            )));
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// First column realified as `(Re U₀₀, Im U₀₀, −Re U₁₀, Im U₁₀)`.
    pub fn realify(&self) -> RealifiedState {
        realify(&self.0)
    }
}

/// Realified first column of a special unitary matrix, a unit vector of ℝ⁴.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealifiedState(pub [f64; 4]);

impl RealifiedState {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn realify(u: &Mat2) -> RealifiedState {
    let (u00, u10) = (u.get(0, 0), u.get(1, 0));
    RealifiedState([u00.re, u00.im, -u10.re, u10.im])
}

/// `exp(−i dt (σ_z + a σ_x))` in closed form.
pub fn step_propagator(a: f64, dt: f64) -> UnitaryMatrix {
    UnitaryMatrix(step_matrix(a, dt))
}

fn step_matrix(a: f64, dt: f64) -> Mat2 {
    let r = (1.0 + a * a).sqrt();
    let (s, c) = (dt * r).sin_cos();
    let sr = s / r;
    Mat2::new(
        Complex64::new(c, -sr),
        Complex64::new(0.0, -a * sr),
        Complex64::new(0.0, -a * sr),
        Complex64::new(c, sr),
    )
}

/// `∂/∂a exp(−i dt (σ_z + a σ_x))`.
///
/// Writing the step as `cos α − i sin α (n·σ)` with `α = dt√(1+a²)` and
/// `n = (a, 0, 1)/√(1+a²)`, the derivative picks up `α'` in both the
/// trigonometric factors and the axis.
fn step_derivative(a: f64, dt: f64) -> Mat2 {
    let r2 = 1.0 + a * a;
    let r = r2.sqrt();
    let (s, c) = (dt * r).sin_cos();
    let da = dt * a / r;
    // n·σ and dn/da·σ with n = (a, 0, 1)/r; dn/da = (1, 0, −a)/r³.
    let n_sigma = Mat2::from_real(1.0 / r, a / r, a / r, -1.0 / r);
    let dn_sigma = Mat2::from_real(-a, 1.0, 1.0, a).scale_re(1.0 / (r2 * r));
    let rot = n_sigma.scale_re(c * da) + dn_sigma.scale_re(s);
    Mat2::identity().scale_re(-s * da) + rot.scale(-I)
}

fn products(prob: &ClosedGateProblem, a: &[f64]) -> Vec<Mat2> {
    let dt = prob.dt();
    let mut out = Vec::with_capacity(a.len() + 1);
    let mut u = Mat2::identity();
    out.push(u);
    for &ak in a {
        u = step_matrix(ak, dt) * u;
        out.push(u);
    }
    out
}

/// `U_N ⋯ U_1`.
pub fn propagate_gate(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<UnitaryMatrix> {
    prob.check(ctrl)?;
    Ok(UnitaryMatrix(propagate_amplitudes(prob, &ctrl.amplitudes)))
}

fn propagate_amplitudes(prob: &ClosedGateProblem, a: &[f64]) -> Mat2 {
    let dt = prob.dt();
    a.iter()
        .fold(Mat2::identity(), |u, &ak| step_matrix(ak, dt) * u)
}

pub fn objective_jw(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<f64> {
    prob.check(ctrl)?;
    Ok(jw_of_amplitudes(prob, &ctrl.amplitudes))
}

/// `J_W` through the realified final state, `(x₁ cos φ + x₂ sin φ)²`.
pub fn objective_jw_realified(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<f64> {
    let x = propagate_gate(prob, ctrl)?.realify().0;
    let (s, c) = prob.phi_w.sin_cos();
    Ok((x[0] * c + x[1] * s).powi(2))
}

pub(crate) fn jw_of_amplitudes(prob: &ClosedGateProblem, a: &[f64]) -> f64 {
    let u = propagate_amplitudes(prob, a);
    0.25 * (prob.target().dagger() * u).trace().norm_sqr()
}

/// Exact `∂J_W/∂a_k` for every interval.
pub fn gradient_jw(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<Vec<f64>> {
    prob.check(ctrl)?;
    Ok(value_and_gradient(prob, &ctrl.amplitudes).1)
}

/// Value and exact gradient in one forward/backward sweep.
///
/// `J = |z|²/4` with `z = Tr(W† U_N ⋯ U_1)`, so
/// `∂J/∂a_k = Re(z̄ · Tr(W† U_N ⋯ U_{k+1} U_k' U_{k−1} ⋯ U_1)) / 2`.
pub(crate) fn value_and_gradient(prob: &ClosedGateProblem, a: &[f64]) -> (f64, Vec<f64>) {
    let dt = prob.dt();
    let fwd = products(prob, a);
    let n = a.len();
    let wd = prob.target().dagger();
    let z = (wd * fwd[n]).trace();
    let mut grad = vec![0.0; n];
    // left = W† U_N ⋯ U_{k+1}
    let mut left = wd;
    for k in (0..n).rev() {
        let dz = (left * step_derivative(a[k], dt) * fwd[k]).trace();
        grad[k] = 0.5 * (z.conj() * dz).re;
        left = left * step_matrix(a[k], dt);
    }
    (0.25 * z.norm_sqr(), grad)
}

/// The classical first-order GRAPE expression `(δt/2) Im[Tr(Y†) Tr(Y V_k)]`,
/// with `Y = W† U(T)` and `V_k` the control operator in the interaction
/// picture of the first `k` steps.
///
/// Only accurate to leading order in `δt`; kept as a diagnostic next to the
/// exact [`gradient_jw`].
pub fn gradient_jw_first_order(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<Vec<f64>> {
    prob.check(ctrl)?;
    let fwd = products(prob, &ctrl.amplitudes);
    let n = ctrl.amplitudes.len();
    let y = prob.target().dagger() * fwd[n];
    let tr_y_dag = y.trace().conj();
    let dt = prob.dt();
    Ok((1..=n)
        .map(|k| {
            let vk = fwd[k].dagger() * Mat2::sigma_x() * fwd[k];
            0.5 * dt * (tr_y_dag * (y * vk).trace()).im
        })
        .collect())
}

/// Realified states `x(t_k)` at the `N + 1` interval boundaries.
pub fn realified_trajectory(prob: &ClosedGateProblem, ctrl: &PiecewiseConstantControl) -> Result<Vec<RealifiedState>> {
    prob.check(ctrl)?;
    Ok(products(prob, &ctrl.amplitudes).iter().map(realify).collect())
}

/// Drift of the realified system, `ẋ = (A + B v) x`.
pub fn realified_drift(x: &[f64; 4]) -> [f64; 4] {
    [x[1], -x[0], x[3], -x[2]]
}

/// Control coupling of the realified system.
pub fn realified_coupling(x: &[f64; 4]) -> [f64; 4] {
    [x[3], x[2], -x[1], -x[0]]
}

fn transpose_drift(p: &[f64; 4]) -> [f64; 4] {
    // Aᵀ = −A for the block rotation.
    [-p[1], p[0], -p[3], p[2]]
}

/// PMP diagnostics at the zero control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmpResidual {
    /// `max_t |⟨p⁰(t), B x⁰(t)⟩|`.
    pub switching: f64,
    /// `max_t |H(p⁰, x⁰, 1) − H(p⁰, x⁰, −1)| / 2`, zero when the Pontryagin
    /// function is flat in `v`.
    pub hamiltonian_slope: f64,
}

impl PmpResidual {
    pub fn max(&self) -> f64 {
        self.switching.max(self.hamiltonian_slope)
    }
}

/// Integrates `x⁰` forward and the conjugate `p⁰` backward with RK4 at
/// `v = 0`, sampling the switching function at `samples` uniform nodes.
pub fn pmp_residual_at_zero(prob: &ClosedGateProblem, samples: usize) -> PmpResidual {
    let samples = samples.max(2);
    let substeps = 16;
    let h = prob.duration / ((samples - 1) * substeps) as f64;
    let rk4 = |f: &dyn Fn(&[f64; 4]) -> [f64; 4], x: [f64; 4], h: f64| {
        let add = |x: &[f64; 4], k: &[f64; 4], s: f64| {
            [x[0] + s * k[0], x[1] + s * k[1], x[2] + s * k[2], x[3] + s * k[3]]
        };
        let k1 = f(&x);
        let k2 = f(&add(&x, &k1, h / 2.0));
        let k3 = f(&add(&x, &k2, h / 2.0));
        let k4 = f(&add(&x, &k3, h));
        let mut out = x;
        for i in 0..4 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    };

    let mut xs = Vec::with_capacity(samples);
    let mut x = [1.0, 0.0, 0.0, 0.0];
    xs.push(x);
    for _ in 1..samples {
        for _ in 0..substeps {
            x = rk4(&realified_drift, x, h);
        }
        xs.push(x);
    }

    // p(T) = 2 L x(T), L = ℓℓᵀ with ℓ = (cos φ, sin φ, 0, 0).
    let (s, c) = prob.phi_w.sin_cos();
    let xt = xs[samples - 1];
    let proj = xt[0] * c + xt[1] * s;
    let mut p = [2.0 * c * proj, 2.0 * s * proj, 0.0, 0.0];
    let back = |p: &[f64; 4]| {
        let q = transpose_drift(p);
        [-q[0], -q[1], -q[2], -q[3]]
    };

    let dot = |a: &[f64; 4], b: &[f64; 4]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let hamiltonian = |p: &[f64; 4], x: &[f64; 4], v: f64| {
        let ax = realified_drift(x);
        let bx = realified_coupling(x);
        let f = [ax[0] + v * bx[0], ax[1] + v * bx[1], ax[2] + v * bx[2], ax[3] + v * bx[3]];
        dot(p, &f)
    };

    let mut out = PmpResidual {
        switching: 0.0,
        hamiltonian_slope: 0.0,
    };
    for i in (0..samples).rev() {
        let xi = &xs[i];
        out.switching = out.switching.max(dot(&p, &realified_coupling(xi)).abs());
        let slope = 0.5 * (hamiltonian(&p, xi, 1.0) - hamiltonian(&p, xi, -1.0));
        out.hamiltonian_slope = out.hamiltonian_slope.max(slope.abs());
        if i > 0 {
            for _ in 0..substeps {
                p = rk4(&back, p, -h);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn ctrl(prob: &ClosedGateProblem, a: Vec<f64>) -> PiecewiseConstantControl {
        PiecewiseConstantControl::new(prob.duration, a).unwrap()
    }

    #[test]
    fn free_step_is_diagonal_phase() {
        let u = step_propagator(0.0, FRAC_PI_2);
        let want = Mat2::diag(-I, I);
        assert!(u.matrix().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn step_matches_matrix_exponential() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: f64 = rng.random_range(-50.0..50.0);
            let dt: f64 = rng.random_range(0.001..1.0);
            let h = Mat2::sigma_z() + Mat2::sigma_x().scale_re(a);
            let want = oracle::expm(&h.scale(Complex64::new(0.0, -dt)));
            let got = step_propagator(a, dt);
            assert!(got.matrix().max_abs_diff(&want) < 1e-12, "a={a} dt={dt}");
            assert!(got.matrix().unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn short_step_is_near_identity() {
        let dt = 1e-7;
        let u = step_propagator(1.0, dt);
        assert!(u.matrix().max_abs_diff(&Mat2::identity()) < 2.0 * dt);
    }

    #[test]
    fn zero_control_gives_cos_squared() {
        let p = ClosedGateProblem::new(FRAC_PI_4, FRAC_PI_4, 3).unwrap();
        let j = objective_jw(&p, &ctrl(&p, vec![0.0; 3])).unwrap();
        assert!(j.abs() < 1e-15);

        let p = ClosedGateProblem::new(PI / 20.0, FRAC_PI_2, 5).unwrap();
        let j = objective_jw(&p, &ctrl(&p, vec![0.0; 5])).unwrap();
        assert!((j - 0.024471741852423).abs() < 1e-12);

        let u = propagate_gate(&p, &ctrl(&p, vec![0.0; 5])).unwrap();
        let want = Mat2::diag(Complex64::from_polar(1.0, -FRAC_PI_2), Complex64::from_polar(1.0, FRAC_PI_2));
        assert!(u.matrix().max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn semigroup_split() {
        let p = ClosedGateProblem::new(0.3, 1.2, 4).unwrap();
        let a = vec![0.4, -1.3, 2.0, 0.7];
        let whole = propagate_gate(&p, &ctrl(&p, a.clone())).unwrap();
        let half = ClosedGateProblem::new(0.3, 0.6, 2).unwrap();
        let first = propagate_gate(&half, &ctrl(&half, a[..2].to_vec())).unwrap();
        let second = propagate_gate(&half, &ctrl(&half, a[2..].to_vec())).unwrap();
        let joined = *second.matrix() * *first.matrix();
        assert!(whole.matrix().max_abs_diff(&joined) < 1e-12);
    }

    #[test]
    fn propagation_matches_ode() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = ClosedGateProblem::new(0.7, 1.4, 8).unwrap();
        let a: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
        let c = ctrl(&p, a);
        let u = propagate_gate(&p, &c).unwrap();
        let ode = oracle::schrodinger_rk4(&c, 1e-4);
        assert!(u.matrix().max_abs_diff(&ode) < 1e-8);

        let traj = realified_trajectory(&p, &c).unwrap();
        let real_ode = oracle::realified_rk4(&c, 1e-4);
        for (x, y) in traj.iter().zip(&real_ode) {
            assert!((x.norm() - 1.0).abs() < 1e-10);
            for i in 0..4 {
                assert!((x.0[i] - y[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn free_realified_trajectory() {
        let p = ClosedGateProblem::new(0.7, 1.0, 4).unwrap();
        let traj = realified_trajectory(&p, &ctrl(&p, vec![0.0; 4])).unwrap();
        for (k, x) in traj.iter().enumerate() {
            let t = k as f64 * 0.25;
            assert!((x.0[0] - t.cos()).abs() < 1e-14);
            assert!((x.0[1] + t.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn two_objective_forms_agree() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let p = ClosedGateProblem::new(rng.random_range(0.01..1.5), rng.random_range(0.01..1.57), 6).unwrap();
            let a: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            let c = ctrl(&p, a);
            let j1 = objective_jw(&p, &c).unwrap();
            let j2 = objective_jw_realified(&p, &c).unwrap();
            assert!((j1 - j2).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&j1));
        }
    }

    #[test]
    fn gradient_vanishes_at_zero() {
        let p = ClosedGateProblem::new(0.4, 0.9, 7).unwrap();
        let g = gradient_jw(&p, &ctrl(&p, vec![0.0; 7])).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let p = ClosedGateProblem::new(0.5, 1.1, 6).unwrap();
        let a: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = gradient_jw(&p, &ctrl(&p, a.clone())).unwrap();
        let fd = oracle::central_gradient(|x| jw_of_amplitudes(&p, x), &a, 1e-6);
        for (x, y) in g.iter().zip(&fd) {
            assert!((x - y).abs() <= 1e-6 * y.abs().max(1e-3), "{x} vs {y}");
        }
    }

    #[test]
    fn single_interval_derivative() {
        let p = ClosedGateProblem::new(0.6, 1.0, 1).unwrap();
        // N = 1: J(a) = (cos α cos φ − sin α sin φ / r)², α = √(1+a²).
        let j = |a: f64| {
            let r = (1.0 + a * a).sqrt();
            let z = r.cos() * 0.6f64.cos() - r.sin() * 0.6f64.sin() / r;
            z * z
        };
        for a in [0.05, 0.1, 0.2] {
            let g = gradient_jw(&p, &ctrl(&p, vec![a])).unwrap()[0];
            let h = 1e-5;
            let want = (j(a + h) - j(a - h)) / (2.0 * h);
            assert!((g - want).abs() < 1e-8, "{g} {want}");
            assert!((jw_of_amplitudes(&p, &[a]) - j(a)).abs() < 1e-14);
        }
    }

    #[test]
    fn first_order_formula_is_leading_term() {
        // Error of the classical expression shrinks like δt² relative to δt.
        let a = [0.3, -0.8, 1.1, 0.2];
        let rel = |n: usize| {
            let p = ClosedGateProblem::new(0.5, 1.2, n).unwrap();
            let amps: Vec<f64> = (0..n).map(|k| a[k * a.len() / n]).collect();
            let c = ctrl(&p, amps);
            let exact = gradient_jw(&p, &c).unwrap();
            let approx = gradient_jw_first_order(&p, &c).unwrap();
            let num: f64 = exact.iter().zip(&approx).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            num / exact.iter().map(|x| x.abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (rel(4), rel(64));
        assert!(fine < coarse / 4.0, "{coarse} {fine}");
    }

    #[test]
    fn pmp_residuals_vanish() {
        for (phi, t) in [(FRAC_PI_4, FRAC_PI_4), (PI / 20.0, FRAC_PI_2)] {
            let p = ClosedGateProblem::new(phi, t, 1).unwrap();
            assert!(pmp_residual_at_zero(&p, 100).max() <= 1e-10);
        }
        let p = ClosedGateProblem::new(0.3, 1e-300, 1).unwrap();
        assert_eq!(pmp_residual_at_zero(&p, 2).max(), 0.0);
    }

    #[test]
    fn rejects_mismatched_controls() {
        let p = ClosedGateProblem::new(0.3, 1.0, 3).unwrap();
        let short = PiecewiseConstantControl::new(1.0, vec![0.0; 2]).unwrap();
        assert!(matches!(objective_jw(&p, &short), Err(Error::IntervalMismatch { .. })));
        let long = PiecewiseConstantControl::new(2.0, vec![0.0; 3]).unwrap();
        assert!(matches!(gradient_jw(&p, &long), Err(Error::DurationMismatch { .. })));
        assert!(ClosedGateProblem::new(0.0, 1.0, 1).is_err());
        assert!(ClosedGateProblem::new(0.3, 1.6, 1).is_err());
    }
}
