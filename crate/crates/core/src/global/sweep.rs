//! Maximal gate fidelity over a grid of target phases and durations.

use rayon::prelude::*;
use serde::Serialize;

use super::{differential_evolution, dual_annealing, BoxDomain, GlobalSearchConfig};
use crate::error::{Error, Result};
use crate::gate::{self, ClosedGateProblem, GrapeOptions};

/// Nodes `φ_j = step·j` for `j ∈ phi_indices` and `T_i = step·i` for
/// `i ∈ time_indices`, with `N = interval_base + i` pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub step: f64,
    pub phi_indices: Vec<usize>,
    pub time_indices: Vec<usize>,
    pub interval_base: usize,
    pub amplitude_bound: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            step: std::f64::consts::PI / 20.0,
            phi_indices: (1..=9).collect(),
            time_indices: (1..=10).collect(),
            interval_base: 4,
            amplitude_bound: 50.0,
        }
    }
}

impl GridSpec {
    /// `(node id, j, i)` in row-major order, time outer.
    pub fn nodes(&self) -> Vec<(u64, usize, usize)> {
        let mut out = Vec::new();
        for &i in &self.time_indices {
            for &j in &self.phi_indices {
                out.push((out.len() as u64, j, i));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    /// Unbounded GRAPE ascent from several random starts.
    Grape { starts: usize },
    /// Best of several DE and dual annealing runs on `|a_k| ≤ bound`.
    Stochastic { de_runs: usize, da_runs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeRow {
    pub phi_index: usize,
    pub time_index: usize,
    pub phi_w: f64,
    #[serde(rename = "T")]
    pub duration: f64,
    pub intervals: usize,
    pub jw_zero: f64,
    pub jw_max: f64,
    pub delta: f64,
    pub best_point: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LandscapeSummary {
    pub nodes: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_mean: f64,
    pub jw_max_min: f64,
    pub jw_max_mean: f64,
}

impl LandscapeSummary {
    pub fn of(rows: &[LandscapeRow]) -> Self {
        let n = rows.len().max(1) as f64;
        let fold = |f: fn(&LandscapeRow) -> f64, init: f64, op: fn(f64, f64) -> f64| rows.iter().map(f).fold(init, op);
        LandscapeSummary {
            nodes: rows.len(),
            delta_min: fold(|r| r.delta, f64::INFINITY, f64::min),
            delta_max: fold(|r| r.delta, f64::NEG_INFINITY, f64::max),
            delta_mean: fold(|r| r.delta, 0.0, |a, b| a + b) / n,
            jw_max_min: fold(|r| r.jw_max, f64::INFINITY, f64::min),
            jw_max_mean: fold(|r| r.jw_max, 0.0, |a, b| a + b) / n,
        }
    }
}

fn optimize_node(prob: &ClosedGateProblem, bound: f64, node: u64, method: SweepMethod, cfg: &GlobalSearchConfig) -> Result<(f64, Vec<f64>)> {
    match method {
        SweepMethod::Grape { starts } => {
            let opts = GrapeOptions { node, ..Default::default() };
            let rep = gate::grape_maximize_with(prob, starts, cfg.seed, &opts);
            Ok((rep.best_value, rep.best_point))
        }
        SweepMethod::Stochastic { de_runs, da_runs } => {
            let domain = BoxDomain::symmetric(prob.intervals, bound)?;
            let f = |a: &[f64]| -gate::jw_of_amplitudes(prob, a);
            let mut best = (f64::NEG_INFINITY, Vec::new());
            let mut consider = |v: f64, x: Vec<f64>| {
                if -v > best.0 {
                    best = (-v, x);
                }
            };
            for run in 0..de_runs {
                let c = GlobalSearchConfig { stream: node, run: run as u64, ..*cfg };
                let r = differential_evolution(&f, &domain, &c);
                consider(r.best_value, r.best_point);
            }
            for run in 0..da_runs {
                let c = GlobalSearchConfig { stream: node, run: run as u64, ..*cfg };
                let r = dual_annealing(&f, &domain, &c);
                consider(r.best_value, r.best_point);
            }
            if best.1.is_empty() {
                return Err(Error::InvalidParameter("stochastic sweep needs at least one run".into()));
            }
            Ok(best)
        }
    }
}

/// One row per grid node, in [`GridSpec::nodes`] order.
pub fn landscape_sweep(grid: &GridSpec, method: SweepMethod, cfg: &GlobalSearchConfig) -> Result<Vec<LandscapeRow>> {
    cfg.validate()?;
    if let SweepMethod::Grape { starts: 0 } = method {
        return Err(Error::InvalidParameter("GRAPE sweep needs at least one start".into()));
    }
    grid.nodes()
        .into_par_iter()
        .map(|(node, j, i)| {
            let phi_w = grid.step * j as f64;
            let duration = grid.step * i as f64;
            let prob = ClosedGateProblem::new(phi_w, duration, grid.interval_base + i)?;
            let jw_zero = prob.zero_control_value();
            let (jw_max, best_point) = optimize_node(&prob, grid.amplitude_bound, node, method, cfg)?;
            Ok(LandscapeRow {
                phi_index: j,
                time_index: i,
                phi_w,
                duration,
                intervals: prob.intervals,
                jw_zero,
                jw_max,
                delta: jw_max - jw_zero,
                best_point,
            })
        })
        .collect()
}
