//! Small dense semidefinite programs.

mod hermitian;
mod ipm;
mod presolve;
mod problem;

pub use hermitian::{embed, extract, functional, hermitian_basis, positive_part_trace};
pub use ipm::{solve, Certificate, SdpResiduals, SdpSettings, SdpSolution, SdpStatus};
pub use nalgebra::DMatrix;
pub use problem::{Constraint, ConstraintSense, SdpProblem, SYMMETRY_TOL};
