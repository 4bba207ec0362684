//! Common result record for all optimizer drivers.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Objective dropped below the requested threshold.
    Threshold,
    /// Gradient norm below tolerance.
    Stationary,
    /// Iteration or generation cap.
    MaxIterations,
    /// Objective evaluation budget exhausted.
    MaxEvaluations,
    /// Line search could not make progress.
    NoProgress,
}

/// Outcome of an optimizer run.
///
/// `history[m]` is the objective after iteration `m` (entry 0 is the start).
/// For maximizers the values are of the maximized objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerReport {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    /// Final duration, for drivers that also optimize the stage length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_time: Option<f64>,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub stop: StopReason,
}

impl OptimizerReport {
    /// First iteration whose recorded value satisfies `pred`.
    pub fn first_iteration(&self, pred: impl Fn(f64) -> bool) -> Option<usize> {
        self.history.iter().position(|&g| pred(g))
    }
}
