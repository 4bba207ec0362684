//! Second stage: coherent control with the incoherent drive switched off.

mod adjoint;
mod integrate;
mod search;

pub use adjoint::{adjoint_gradient_j2alpha, objective_j2alpha, sampled_inner, AdjointConfig};
pub use integrate::{integrate_bloch, Trajectory};
pub use search::{stage2_grid_search, FamilySpec, HarmonicControl, Shape, Stage2SearchSpec, Stage2Solution};
