//! Control of two-level quantum systems.
//!
//! * [`gate`]: phase gate generation in the closed system, exact propagators
//!   and gradients, multistart local ascent.
//! * [`global`]: differential evolution and dual annealing over amplitude
//!   boxes, and the landscape sweep built on them.
//! * [`stage1`]: the incoherent first stage of the two-stage steering method,
//!   solved in closed form.
//! * [`gpm`]: projected gradient descent with heavy-ball momentum.
//! * [`stage2`]: coherent second stage by Runge–Kutta integration, grid
//!   search over harmonic pulses, and an adjoint gradient.
//! * [`lbfgs`]: the shared quasi-Newton minimizer.
//! * [`oracle`]: slow independent reference computations.
//! * [`cli`]: the batch driver behind the `twolevel` binary.

pub mod cli;
pub mod error;
pub mod gate;
pub mod global;
pub mod gpm;
pub mod lbfgs;
pub mod linalg;
pub mod oracle;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod stage1;
pub mod stage2;

pub use error::{Error, Result};
pub use quantum::{BlochState, DensityMatrix, EigenPair, OpenSystemParams, PiecewiseConstantControl, Pole};
pub use report::{OptimizerReport, StopReason};
