//! Weighted ℓ¹-regularized least squares by split-Bregman iteration.

mod admm;
mod problem;

pub use admm::{
    solve, solve_basis_pursuit, AdmmSolver, BasisPursuitResult, Continuation, SolveResult, SolverConfig,
    BASIS_PURSUIT_TOL,
};
pub use problem::{shrink, shrink_vec, support, WeightedProblem, SUPPORT_REL_TOL};
