//! Gradient-free global minimization over boxes, and the gate landscape
//! sweep that uses it.

mod annealing;
mod de;
mod nelder_mead;
mod sweep;

pub use annealing::dual_annealing;
pub use de::differential_evolution;
pub use nelder_mead::nelder_mead;
pub use sweep::{landscape_sweep, GridSpec, LandscapeRow, LandscapeSummary, SweepMethod};

use serde::Serialize;

use crate::error::{Error, Result};

/// Per-coordinate bounds `lower[k] < upper[k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidParameter("box bounds must have equal, nonzero length".into()));
        }
        if let Some(k) = (0..lower.len()).find(|&k| !(lower[k] < upper[k])) {
            return Err(Error::InvalidParameter(format!(
                "box coordinate {k}: lower {} must be below upper {}",
                lower[k], upper[k]
            )));
        }
        Ok(BoxDomain { lower, upper })
    }

    /// `[−r, r]^dim`.
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        Self::new(vec![-r; dim], vec![r; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[k], self.upper[k]);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(k, v)| self.lower[k] <= *v && *v <= self.upper[k])
    }
}

/// DE/rand/1/bin settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeParams {
    /// Population is `popsize × dim`.
    pub popsize: usize,
    pub generations: usize,
    pub mutation: f64,
    pub crossover: f64,
    /// Finish with a Nelder–Mead polish of the best member.
    pub polish: bool,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            popsize: 15,
            generations: 300,
            mutation: 0.8,
            crossover: 0.9,
            polish: true,
        }
    }
}

/// Generalized simulated annealing settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealingParams {
    pub max_iterations: usize,
    pub initial_temp: f64,
    /// Reanneal when the temperature falls below `initial_temp × ratio`.
    pub restart_temp_ratio: f64,
    /// Tsallis visiting shape `q_v ∈ (1, 3)`.
    pub visit: f64,
    /// Acceptance shape `q_a < 1`.
    pub accept: f64,
    pub local_search: bool,
}

impl Default for AnnealingParams {
    fn default() -> Self {
        AnnealingParams {
            max_iterations: 1000,
            initial_temp: 5230.0,
            restart_temp_ratio: 2e-5,
            visit: 2.62,
            accept: -5.0,
            local_search: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlobalSearchConfig {
    pub seed: u64,
    /// Stream selector (grid node id in sweeps).
    pub stream: u64,
    /// Run index within the stream.
    pub run: u64,
    pub max_evaluations: usize,
    pub de: DeParams,
    pub annealing: AnnealingParams,
}

impl Default for GlobalSearchConfig {
    fn default() -> Self {
        GlobalSearchConfig {
            seed: 0,
            stream: 0,
            run: 0,
            max_evaluations: 10_000_000,
            de: DeParams::default(),
            annealing: AnnealingParams::default(),
        }
    }
}

impl GlobalSearchConfig {
    pub fn validate(&self) -> Result<()> {
        let de = &self.de;
        let an = &self.annealing;
        let checks = [
            (de.popsize >= 1 && de.generations >= 1, "DE counts must be ≥ 1"),
            (de.mutation > 0.0 && de.mutation <= 2.0, "DE mutation must lie in (0, 2]"),
            ((0.0..=1.0).contains(&de.crossover), "DE crossover must lie in [0, 1]"),
            (an.max_iterations >= 1, "annealing iterations must be ≥ 1"),
            (an.initial_temp > 0.0, "initial temperature must be > 0"),
            (an.restart_temp_ratio > 0.0 && an.restart_temp_ratio < 1.0, "restart ratio must lie in (0, 1)"),
            (an.visit > 1.0 && an.visit < 3.0, "visiting shape must lie in (1, 3)"),
            (an.accept < 1.0, "acceptance shape must be < 1"),
            (self.max_evaluations >= 1, "evaluation budget must be ≥ 1"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(Error::InvalidParameter((*msg).into())),
            None => Ok(()),
        }
    }
}

/// Counts calls and enforces the shared evaluation budget.
pub(crate) struct Counted<'a, F> {
    f: &'a F,
    pub evaluations: usize,
}

impl<'a, F: Fn(&[f64]) -> f64> Counted<'a, F> {
    pub fn new(f: &'a F) -> Self {
        Counted { f, evaluations: 0 }
    }

    pub fn call(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}
