//! Shared two-level domain types: density matrices, Bloch vectors, physical
//! constants of the open system and piecewise constant controls.
//!
//! Basis convention: `σ_z = diag(1, −1)`, so `ρ₁₁ − ρ₂₂ = x₃` and
//! `ρ = (I + x₁σ_x + x₂σ_y + x₃σ_z) / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;

/// Default tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A validated 2×2 density matrix (Hermitian, unit trace, PSD).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    pub fn new(m: Mat2) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_TOL)
    }

    pub fn with_tolerance(m: Mat2, tol: f64) -> Result<Self> {
        let herm = m.max_abs_diff(&m.dagger());
        if herm > tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (defect {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace {} ≠ 1",
                tr.re
            )));
        }
        // For a Hermitian unit-trace 2×2 matrix the smaller eigenvalue is
        // (1 − sqrt(1 − 4 det)) / 2.
        let det = m.det().re;
        let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
        let p2 = 0.5 * (1.0 - disc);
        if p2 < -tol {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {p2:e}"
            )));
        }
        Ok(DensityMatrix(m))
    }

    pub fn diagonal(p_upper: f64, p_lower: f64) -> Result<Self> {
        Self::new(Mat2::from_real(p_upper, 0.0, 0.0, p_lower))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// `max |ρ² − ρ|`; zero for rank-1 projectors.
    pub fn purity_defect(&self) -> f64 {
        (self.0 * self.0).max_abs_diff(&self.0)
    }
}

/// A point of the closed unit ball in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl BlochState {
    pub const ORIGIN: BlochState = BlochState {
        x1: 0.0,
        x2: 0.0,
        x3: 0.0,
    };

    /// Validating constructor; rejects points with norm above `1 + 1e-12`.
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let s = BlochState { x1, x2, x3 };
        if !(x1.is_finite() && x2.is_finite() && x3.is_finite()) {
            return Err(Error::NonFinite("Bloch vector component".into()));
        }
        let norm = s.norm();
        if norm > 1.0 + DEFAULT_TOL {
            return Err(Error::OutsideBlochBall { norm });
        }
        Ok(s)
    }

    /// Builds a vector without the ball check (intermediate integrator values).
    pub const fn raw(x1: f64, x2: f64, x3: f64) -> Self {
        BlochState { x1, x2, x3 }
    }

    pub fn from_array(x: [f64; 3]) -> Self {
        Self::raw(x[0], x[1], x[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn norm(&self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3).sqrt()
    }

    pub fn sub(&self, other: &BlochState) -> [f64; 3] {
        [self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3]
    }

    pub fn distance_squared(&self, other: &BlochState) -> f64 {
        self.sub(other).iter().map(|d| d * d).sum()
    }

    pub fn distance(&self, other: &BlochState) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn max_abs_diff(&self, other: &BlochState) -> f64 {
        self.sub(other).iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

/// Physical constants of the open two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenSystemParams {
    /// Transition frequency ω.
    pub omega: f64,
    /// Decay rate γ.
    pub gamma: f64,
    /// Dipole coupling μ of the coherent control.
    pub mu: f64,
    /// Ceiling for the incoherent control.
    pub n_max: f64,
}

impl Default for OpenSystemParams {
    fn default() -> Self {
        OpenSystemParams {
            omega: 1.0,
            gamma: 0.002,
            mu: 0.01,
            n_max: 100.0,
        }
    }
}

impl OpenSystemParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0
            && self.gamma > 0.0
            && self.mu != 0.0
            && self.mu.is_finite()
            && self.n_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "open system requires ω > 0, γ > 0, μ ≠ 0, n_max > 0 (got {self:?})"
            )))
        }
    }
}

/// Admissible set for a piecewise constant control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlKind {
    /// Incoherent: `a_k ≥ 0`, optionally `a_k ≤ ceiling`.
    Incoherent { ceiling: Option<f64> },
    /// Coherent with `|a_k| ≤ ν`.
    CoherentBounded { nu: f64 },
    /// Coherent, unconstrained.
    Coherent,
}

/// Final time plus `N` amplitudes on a uniform grid of width `duration / N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConstantControl {
    pub duration: f64,
    pub amplitudes: Vec<f64>,
}

impl PiecewiseConstantControl {
    pub fn new(duration: f64, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidControl("need at least one interval".into()));
        }
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidControl(format!(
                "duration must be positive, got {duration}"
            )));
        }
        if let Some(bad) = amplitudes.iter().find(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("amplitude {bad}")));
        }
        Ok(PiecewiseConstantControl {
            duration,
            amplitudes,
        })
    }

    pub fn zeros(duration: f64, n: usize) -> Result<Self> {
        Self::new(duration, vec![0.0; n])
    }

    pub fn constant(duration: f64, n: usize, level: f64) -> Result<Self> {
        Self::new(duration, vec![level; n])
    }

    pub fn intervals(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn dt(&self) -> f64 {
        self.duration / self.amplitudes.len() as f64
    }

    /// Amplitude active at time `t` (right-continuous, `v(T) = v(T−)`).
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.amplitudes.len();
        let k = ((t / self.dt()).floor().max(0.0) as usize).min(n - 1);
        self.amplitudes[k]
    }

    pub fn check(&self, kind: ControlKind) -> Result<()> {
        match kind {
            ControlKind::Incoherent { ceiling } => {
                for (k, &a) in self.amplitudes.iter().enumerate() {
                    if a < 0.0 {
                        return Err(Error::InvalidControl(format!(
                            "incoherent amplitude a_{} = {a} is negative",
                            k + 1
                        )));
                    }
                    if let Some(c) = ceiling {
                        if a > c {
                            return Err(Error::InvalidControl(format!(
                                "incoherent amplitude a_{} = {a} exceeds ceiling {c}",
                                k + 1
                            )));
                        }
                    }
                }
            }
            ControlKind::CoherentBounded { nu } => {
                if let Some((k, a)) = self
                    .amplitudes
                    .iter()
                    .enumerate()
                    .find(|(_, a)| a.abs() > nu)
                {
                    return Err(Error::InvalidControl(format!(
                        "coherent amplitude a_{} = {a} exceeds bound {nu}",
                        k + 1
                    )));
                }
            }
            ControlKind::Coherent => {}
        }
        Ok(())
    }
}

/// Eigenvalues of a density matrix, `p1 ≥ p2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub p1: f64,
    pub p2: f64,
}

impl EigenPair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        let ok = p1 >= p2 && p2 >= -DEFAULT_TOL && p1 <= 1.0 + DEFAULT_TOL;
        if !ok || (p1 + p2 - 1.0).abs() > DEFAULT_TOL {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue pair ({p1}, {p2}) must satisfy 0 ≤ p2 ≤ p1 ≤ 1, p1 + p2 = 1"
            )));
        }
        Ok(EigenPair { p1, p2 })
    }
}

/// Which diagonal ordering to use for the intermediate target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pole {
    /// `x̃ = (0, 0, p1 − p2)`, i.e. `diag(p1, p2)`.
    North,
    /// `x̃ = (0, 0, p2 − p1)`, i.e. `diag(p2, p1)`.
    South,
}

impl std::str::FromStr for Pole {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "north" => Ok(Pole::North),
            "south" => Ok(Pole::South),
            other => Err(Error::Config(format!("unknown pole '{other}'"))),
        }
    }
}

/// The two diagonal states sharing a target's spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntermediateTargets {
    pub north: BlochState,
    pub south: BlochState,
}

impl IntermediateTargets {
    pub fn select(&self, pole: Pole) -> BlochState {
        match pole {
            Pole::North => self.north,
            Pole::South => self.south,
        }
    }
}

/// `x_j = Tr(ρ σ_j)`.
pub fn density_to_bloch(rho: &DensityMatrix) -> BlochState {
    let m = rho.matrix();
    let x1 = (*m * Mat2::sigma_x()).trace().re;
    let x2 = (*m * Mat2::sigma_y()).trace().re;
    let x3 = (*m * Mat2::sigma_z()).trace().re;
    BlochState::raw(x1, x2, x3)
}

/// `ρ = (I + Σ x_j σ_j) / 2`.
pub fn bloch_to_density(x: &BlochState) -> Result<DensityMatrix> {
    let norm = x.norm();
    if norm > 1.0 + DEFAULT_TOL {
        return Err(Error::OutsideBlochBall { norm });
    }
    let m = Mat2::new(
        Complex64::new(0.5 * (1.0 + x.x3), 0.0),
        Complex64::new(0.5 * x.x1, -0.5 * x.x2),
        Complex64::new(0.5 * x.x1, 0.5 * x.x2),
        Complex64::new(0.5 * (1.0 - x.x3), 0.0),
    );
    DensityMatrix::new(m)
}

/// Closed-form spectrum, `p = 1/2 ± ‖x‖/2`.
pub fn eigenvalues_descending(rho: &DensityMatrix) -> EigenPair {
    let r = density_to_bloch(rho).norm().min(1.0);
    EigenPair {
        p1: 0.5 * (1.0 + r),
        p2: 0.5 * (1.0 - r),
    }
}

/// Constant incoherent level `n̄ = p2 / (p1 − p2)` whose steady state has
/// the spectrum `p`.
pub fn constant_incoherent_level(p: &EigenPair) -> Result<f64> {
    let gap = p.p1 - p.p2;
    if gap <= DEFAULT_TOL {
        return Err(Error::DegenerateSpectrum);
    }
    Ok((p.p2 / gap).max(0.0))
}

pub fn intermediate_targets(p: &EigenPair) -> IntermediateTargets {
    let gap = p.p1 - p.p2;
    IntermediateTargets {
        north: BlochState::raw(0.0, 0.0, gap),
        south: BlochState::raw(0.0, 0.0, -gap),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &BlochState, b: &BlochState) -> bool {
        a.max_abs_diff(b) < 1e-12
    }

    #[test]
    fn bloch_of_reference_matrices() {
        let rho = DensityMatrix::diagonal(0.25, 0.75).unwrap();
        assert!(close(&density_to_bloch(&rho), &BlochState::raw(0.0, 0.0, -0.5)));

        let mixed = DensityMatrix::diagonal(0.5, 0.5).unwrap();
        assert!(close(&density_to_bloch(&mixed), &BlochState::ORIGIN));

        let rho3 = DensityMatrix::new(Mat2::from_real(0.5, 0.25, 0.25, 0.5)).unwrap();
        assert!(close(&density_to_bloch(&rho3), &BlochState::raw(0.5, 0.0, 0.0)));
    }

    #[test]
    fn density_of_reference_vectors() {
        let plus = bloch_to_density(&BlochState::raw(1.0, 0.0, 0.0)).unwrap();
        assert!(plus.matrix().max_abs_diff(&Mat2::from_real(0.5, 0.5, 0.5, 0.5)) < 1e-15);
        let up = bloch_to_density(&BlochState::raw(0.0, 0.0, 1.0)).unwrap();
        assert!(up.matrix().max_abs_diff(&Mat2::from_real(1.0, 0.0, 0.0, 0.0)) < 1e-15);
        let t = bloch_to_density(&BlochState::raw(0.0, 0.0, -0.5)).unwrap();
        assert!(t.matrix().max_abs_diff(&Mat2::from_real(0.25, 0.0, 0.0, 0.75)) < 1e-15);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let non_herm = Mat2::from_real(0.5, 0.3, 0.1, 0.5);
        assert!(DensityMatrix::new(non_herm).is_err());
        let bad_trace = Mat2::from_real(0.6, 0.0, 0.0, 0.6);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = Mat2::from_real(1.2, 0.0, 0.0, -0.2);
        assert!(DensityMatrix::new(not_psd).is_err());
        assert!(matches!(
            bloch_to_density(&BlochState::raw(1.0, 0.1, 0.0)),
            Err(Error::OutsideBlochBall { .. })
        ));
    }

    #[test]
    fn spectra() {
        let p = eigenvalues_descending(&DensityMatrix::diagonal(0.25, 0.75).unwrap());
        assert!((p.p1 - 0.75).abs() < 1e-12 && (p.p2 - 0.25).abs() < 1e-12);
        let p = eigenvalues_descending(&DensityMatrix::diagonal(0.5, 0.5).unwrap());
        assert!((p.p1 - 0.5).abs() < 1e-12 && (p.p2 - 0.5).abs() < 1e-12);
        let rho3 = DensityMatrix::new(Mat2::from_real(0.5, 0.25, 0.25, 0.5)).unwrap();
        let p = eigenvalues_descending(&rho3);
        assert!((p.p1 - 0.75).abs() < 1e-12 && (p.p2 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_levels() {
        let lvl = |p1, p2| constant_incoherent_level(&EigenPair::new(p1, p2).unwrap());
        assert!((lvl(0.75, 0.25).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(lvl(1.0, 0.0).unwrap(), 0.0);
        assert!((lvl(0.6, 0.4).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(lvl(0.5, 0.5), Err(Error::DegenerateSpectrum));
    }

    #[test]
    fn intermediate_candidates() {
        let t = intermediate_targets(&EigenPair::new(0.75, 0.25).unwrap());
        assert!(close(&t.select(Pole::North), &BlochState::raw(0.0, 0.0, 0.5)));
        assert!(close(&t.select(Pole::South), &BlochState::raw(0.0, 0.0, -0.5)));
        let t = intermediate_targets(&EigenPair::new(0.5, 0.5).unwrap());
        assert!(close(&t.north, &BlochState::ORIGIN) && close(&t.south, &BlochState::ORIGIN));
        let t = intermediate_targets(&EigenPair::new(1.0, 0.0).unwrap());
        assert_eq!(t.north.x3, 1.0);
        assert_eq!(t.south.x3, -1.0);
    }

    #[test]
    fn control_admissibility() {
        let c = PiecewiseConstantControl::new(1.0, vec![0.0, 2.0, 5.0]).unwrap();
        assert!(c.check(ControlKind::Incoherent { ceiling: None }).is_ok());
        assert!(c.check(ControlKind::Incoherent { ceiling: Some(4.0) }).is_err());
        assert!(c.check(ControlKind::CoherentBounded { nu: 5.0 }).is_ok());
        let neg = PiecewiseConstantControl::new(1.0, vec![-0.1]).unwrap();
        assert!(neg.check(ControlKind::Incoherent { ceiling: None }).is_err());
        assert!(PiecewiseConstantControl::new(0.0, vec![1.0]).is_err());
        assert!(PiecewiseConstantControl::new(1.0, vec![]).is_err());
        assert_eq!(c.value_at(1.0), 5.0);
        assert_eq!(c.value_at(0.34), 2.0);
    }
}
