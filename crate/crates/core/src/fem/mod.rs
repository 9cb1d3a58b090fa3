//! Lagrange P1/P2 finite elements for the fractured Poisson problem.

mod assembly;
pub mod basis;
mod coefficient;
mod multigrid;
mod problem;
mod solution;
mod solver;
mod space;
mod sparse;

pub use assembly::{
    assemble_area_source, assemble_line_source, assemble_stiffness, assemble_stiffness_full, local_stiffness,
    LineSourceMode, LINE_SOURCE_POINTS,
};
pub use coefficient::{Axis, Coefficient, ScalarFn};
pub use multigrid::Multigrid;
pub use problem::{load_vector, resolves_fractures, solve_problem, ProblemSpec, SolveOptions};
pub use solution::{convergence_rate, h1_error, h1_seminorm, h1_seminorm_diff, prolongate, ElementGradient, Solution};
pub use solver::{pcg, solve_direct, solve_spd, solve_with, Cholesky, SolveStats, SolverKind, DEFAULT_RTOL};
pub use space::{build_space, FeSpace};
pub use sparse::CsrMatrix;

#[cfg(test)]
mod tests;
