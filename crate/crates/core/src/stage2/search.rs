//! Grid search over harmonic pulses for the coherent second stage.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::integrate::{integrate_bloch, rk4_step, Trajectory};
use crate::error::{Error, Result};
use crate::quantum::{BlochState, OpenSystemParams};

/// Pulse shape multiplying the amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Shape {
    /// `cos(Ω t)` in absolute time.
    Cos { omega: f64 },
    /// `sin(π d (t − start)/(end − start))`, zero at both ends of the window.
    Sin { harmonic: u32, start: f64, end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicControl {
    pub amplitude: f64,
    pub shape: Shape,
}

impl HarmonicControl {
    pub fn value(&self, t: f64) -> f64 {
        match self.shape {
            Shape::Cos { omega } => self.amplitude * (omega * t).cos(),
            Shape::Sin { harmonic, start, end } => {
                if end <= start {
                    0.0
                } else {
                    self.amplitude * (PI * harmonic as f64 * (t - start) / (end - start)).sin()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilySpec {
    Cos { omega: f64 },
    /// Harmonics `1..=max_harmonic`.
    Sin { max_harmonic: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stage2SearchSpec {
    pub family: FamilySpec,
    /// Amplitudes range over `[−bound, bound]`.
    pub amplitude_bound: f64,
    pub amplitude_step: f64,
    /// Start of the stage (end of the first stage).
    pub start: f64,
    /// Last admissible final time.
    pub horizon: f64,
    pub time_step: f64,
    /// Required Bloch distance to the target.
    pub eps: f64,
    /// RK4 step for every reported distance.
    pub integration_step: f64,
    /// Coarser RK4 step used to shortlist sin-family candidates.
    pub screen_step: f64,
    /// Candidates within `eps + screen_margin` on the coarse pass are
    /// re-integrated at `integration_step`.
    pub screen_margin: f64,
}

impl Stage2SearchSpec {
    pub fn new(family: FamilySpec, amplitude_bound: f64, start: f64, horizon: f64, eps: f64) -> Self {
        Stage2SearchSpec {
            family,
            amplitude_bound,
            amplitude_step: 0.05,
            start,
            horizon,
            time_step: 0.01,
            eps,
            integration_step: 1e-3,
            screen_step: 0.01,
            screen_margin: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("amplitude step", self.amplitude_step),
            ("time step", self.time_step),
            ("accuracy", self.eps),
            ("integration step", self.integration_step),
            ("screen step", self.screen_step),
        ];
        if let Some((name, v)) = pos.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(format!("{name} {v} must be > 0")));
        }
        if !(self.amplitude_bound >= 0.0) {
            return Err(Error::InvalidParameter("amplitude bound must be ≥ 0".into()));
        }
        if !(self.horizon > self.start) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} must exceed the start {}",
                self.horizon, self.start
            )));
        }
        if let FamilySpec::Sin { max_harmonic: 0 } = self.family {
            return Err(Error::InvalidParameter("need at least one harmonic".into()));
        }
        if !(self.screen_margin >= 0.0) {
            return Err(Error::InvalidParameter("screen margin must be ≥ 0".into()));
        }
        Ok(())
    }

    /// Symmetric amplitude grid `j ΔA`, `|j ΔA| ≤ bound`.
    pub fn amplitudes(&self) -> Vec<f64> {
        let j = (self.amplitude_bound / self.amplitude_step + 1e-9).floor() as i64;
        (-j..=j).map(|i| i as f64 * self.amplitude_step).collect()
    }

    fn time_nodes(&self) -> usize {
        ((self.horizon - self.start) / self.time_step + 1e-9).floor() as usize
    }

    fn substeps(&self, len: f64, step: f64) -> usize {
        ((len / step) - 1e-9).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage2Solution {
    pub control: HarmonicControl,
    pub final_time: f64,
    pub distance: f64,
    /// Control at the start and the end of the stage.
    pub v_start: f64,
    pub v_end: f64,
    /// Fine-step trajectory sampled on the search time grid.
    pub trajectory: Trajectory,
}

/// Ordering key: earliest time node, then smallest `|A|`, then harmonic,
/// then the negative amplitude first.
type Key = (usize, f64, u32, f64);

fn better(a: &Key, b: &Key) -> bool {
    (a.0, a.1, a.2, a.3).partial_cmp(&(b.0, b.1, b.2, b.3)) == Some(std::cmp::Ordering::Less)
}

/// Integrates with precomputed shape samples at half steps; `shape[2i]` is
/// the value at step start `i`, `shape[2i + 1]` at its midpoint.
fn run(p: &OpenSystemParams, x: [f64; 3], amplitude: f64, shape: &[f64], h: f64, steps: std::ops::Range<usize>) -> [f64; 3] {
    let mut x = x;
    for i in steps {
        let v = [amplitude * shape[2 * i], amplitude * shape[2 * i + 1], amplitude * shape[2 * i + 2]];
        x = rk4_step(p, x, h, v, [0.0; 3]);
    }
    x
}

fn dist(x: &[f64; 3], y: &BlochState) -> f64 {
    BlochState::from_array(*x).distance(y)
}

/// Finds the grid node `(A_j, t_k)` with the smallest `t_k` (then smallest
/// `|A_j|`) whose distance to `x_target` is at most `eps`.
pub fn stage2_grid_search(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec) -> Result<Stage2Solution> {
    params.validate()?;
    spec.validate()?;
    let d0 = x_init.distance(x_target);
    if d0 <= spec.eps {
        let control = match spec.family {
            FamilySpec::Cos { omega } => HarmonicControl { amplitude: 0.0, shape: Shape::Cos { omega } },
            FamilySpec::Sin { .. } => HarmonicControl {
                amplitude: 0.0,
                shape: Shape::Sin { harmonic: 1, start: spec.start, end: spec.start },
            },
        };
        return Ok(Stage2Solution {
            control,
            final_time: spec.start,
            distance: d0,
            v_start: 0.0,
            v_end: 0.0,
            trajectory: Trajectory { times: vec![spec.start], states: vec![*x_init] },
        });
    }
    let found = match spec.family {
        FamilySpec::Cos { omega } => search_cos(params, x_init, x_target, spec, omega),
        FamilySpec::Sin { max_harmonic } => search_sin(params, x_init, x_target, spec, max_harmonic),
    };
    let (control, k) = match found {
        Some(f) => f,
        None => {
            return Err(Error::UnreachableOnGrid {
                best_distance: best_distance_hint(params, x_init, x_target, spec),
            })
        }
    };
    finish(params, x_init, x_target, spec, control, k)
}

fn finish(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec, control: HarmonicControl, k: usize) -> Result<Stage2Solution> {
    let final_time = spec.start + k as f64 * spec.time_step;
    let sub = spec.substeps(spec.time_step, spec.integration_step);
    let trajectory = integrate_bloch(
        params,
        x_init,
        |t| control.value(t),
        |_| 0.0,
        (spec.start, final_time),
        spec.time_step / sub as f64,
        sub,
    )?;
    Ok(Stage2Solution {
        control,
        final_time,
        distance: trajectory.last().distance(x_target),
        v_start: control.value(spec.start),
        v_end: control.value(final_time),
        trajectory,
    })
}

fn search_cos(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec, omega: f64) -> Option<(HarmonicControl, usize)> {
    let nodes = spec.time_nodes();
    let sub = spec.substeps(spec.time_step, spec.integration_step);
    let h = spec.time_step / sub as f64;
    let shape: Vec<f64> = (0..=2 * nodes * sub)
        .map(|j| (omega * (spec.start + 0.5 * h * j as f64)).cos())
        .collect();
    let x0 = x_init.to_array();

    let best = spec
        .amplitudes()
        .into_par_iter()
        .filter_map(|a| {
            let mut x = x0;
            for k in 1..=nodes {
                x = run(params, x, a, &shape, h, (k - 1) * sub..k * sub);
                if dist(&x, x_target) <= spec.eps {
                    return Some((k, a.abs(), 0u32, a));
                }
            }
            None
        })
        .reduce_with(|p, q| if better(&q, &p) { q } else { p })?;
    Some((HarmonicControl { amplitude: best.3, shape: Shape::Cos { omega } }, best.0))
}

fn search_sin(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec, max_harmonic: u32) -> Option<(HarmonicControl, usize)> {
    let amps = spec.amplitudes();
    let x0 = x_init.to_array();
    let gap = (x_init.x3 - x_target.x3).abs();
    let cut = spec.eps + spec.screen_margin;

    for k in 1..=spec.time_nodes() {
        let len = k as f64 * spec.time_step;
        let end = spec.start + len;
        let n = spec.substeps(len, spec.screen_step);
        let h = len / n as f64;
        let mut shortlist: Vec<Key> = Vec::new();
        for d in 1..=max_harmonic {
            let w = PI * d as f64 / len;
            let shape: Vec<f64> = (0..=2 * n).map(|j| (w * 0.5 * h * j as f64).sin()).collect();
            let hits: Vec<Key> = amps
                .par_iter()
                .filter_map(|&a| {
                    // |ẋ₃| ≤ 2μ|v| + 2γ and ∫|v| = 2|A|·len/π for whole
                    // half-waves, so small amplitudes cannot close the gap.
                    let reach = (2.0 * params.mu.abs() * a.abs() * 2.0 / PI + 2.0 * params.gamma) * len;
                    if gap - reach > cut {
                        return None;
                    }
                    let x = run(params, x0, a, &shape, h, 0..n);
                    (dist(&x, x_target) <= cut).then_some((k, a.abs(), d, a))
                })
                .collect();
            shortlist.extend(hits);
        }
        shortlist.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let fine = spec.substeps(len, spec.integration_step);
        for key in shortlist {
            let control = HarmonicControl {
                amplitude: key.3,
                shape: Shape::Sin { harmonic: key.2, start: spec.start, end },
            };
            let x = integrate_bloch(params, x_init, |t| control.value(t), |_| 0.0, (spec.start, end), len / fine as f64, fine)
                .expect("sin pulse is finite")
                .last();
            if x.distance(x_target) <= spec.eps {
                return Some((control, k));
            }
        }
    }
    None
}

/// Distance reached by the zero pulse at the horizon, reported when the
/// search fails.
fn best_distance_hint(params: &OpenSystemParams, x_init: &BlochState, x_target: &BlochState, spec: &Stage2SearchSpec) -> f64 {
    integrate_bloch(params, x_init, |_| 0.0, |_| 0.0, (spec.start, spec.horizon), spec.time_step, 1)
        .map(|t| t.states.iter().map(|x| x.distance(x_target)).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitude_grid_is_symmetric_with_zero() {
        let s = Stage2SearchSpec::new(FamilySpec::Cos { omega: 1.0 }, 100.0, 450.0, 490.0, 1e-2);
        let a = s.amplitudes();
        assert_eq!(a.len(), 4001);
        assert_eq!(a[2000], 0.0);
        assert_eq!(a[0], -100.0);
        assert_eq!(*a.last().unwrap(), 100.0);
    }

    #[test]
    fn sin_pulse_vanishes_at_window_ends() {
        let c = HarmonicControl { amplitude: -61.8, shape: Shape::Sin { harmonic: 2, start: 450.0, end: 454.99 } };
        assert!(c.value(450.0).abs() < 1e-12);
        assert!(c.value(454.99).abs() < 1e-10);
    }

    #[test]
    fn already_at_target() {
        let p = OpenSystemParams::default();
        let x = BlochState::raw(0.0, 0.0, 0.5);
        for fam in [FamilySpec::Cos { omega: 1.0 }, FamilySpec::Sin { max_harmonic: 3 }] {
            let s = Stage2SearchSpec::new(fam, 10.0, 450.0, 451.0, 1e-2);
            let r = stage2_grid_search(&p, &x, &x, &s).unwrap();
            assert_eq!(r.control.amplitude, 0.0);
            assert_eq!(r.distance, 0.0);
            assert_eq!(r.final_time, 450.0);
        }
    }

    #[test]
    fn small_instances_agree_with_brute_force() {
        // Coarse grid so that every node can be checked directly.
        let p = OpenSystemParams { mu: 0.2, ..Default::default() };
        let x0 = BlochState::raw(0.0, 0.0, 0.9);
        let probe = HarmonicControl { amplitude: 3.0, shape: Shape::Cos { omega: 1.0 } };
        let xt = integrate_bloch(&p, &x0, |t| probe.value(t), |_| 0.0, (0.0, 1.5), 1e-3, 1).unwrap().last();
        let mut s = Stage2SearchSpec::new(FamilySpec::Cos { omega: 1.0 }, 5.0, 0.0, 2.0, 0.1);
        s.amplitude_step = 0.5;
        s.time_step = 0.1;
        let got = stage2_grid_search(&p, &x0, &xt, &s).unwrap();
        let mut best: Option<(usize, f64, f64)> = None;
        for a in s.amplitudes() {
            let c = HarmonicControl { amplitude: a, shape: Shape::Cos { omega: 1.0 } };
            let tr = integrate_bloch(&p, &x0, |t| c.value(t), |_| 0.0, (0.0, 2.0), 1e-3, 100).unwrap();
            if let Some(k) = tr.states.iter().position(|x| x.distance(&xt) <= 0.1) {
                let cand = (k, a.abs(), a);
                if best.map_or(true, |b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2)) {
                    best = Some(cand);
                }
            }
        }
        let best = best.unwrap();
        assert_eq!(got.control.amplitude, best.2);
        assert!((got.final_time - best.0 as f64 * 0.1).abs() < 1e-12);
        assert!(got.distance <= 0.1);
    }

    #[test]
    fn too_strict_accuracy_is_unreachable() {
        let p = OpenSystemParams::default();
        let mut s = Stage2SearchSpec::new(FamilySpec::Sin { max_harmonic: 1 }, 1.0, 0.0, 0.5, 1e-9);
        s.amplitude_step = 0.5;
        s.time_step = 0.1;
        let r = stage2_grid_search(&p, &BlochState::raw(0.0, 0.0, 0.5), &BlochState::raw(0.0, 0.0, -0.5), &s);
        assert!(matches!(r, Err(Error::UnreachableOnGrid { .. })));
    }
}
