//! Algebraic solvers for the discrete problem.

mod cg;
mod newton;

pub use cg::{cg_solve, CgError, CgOutcome};
pub use newton::{
    residual_norm, solve_semilinear, verify_uniform_bound, SemilinearSystem, SolveError, SolveStats, SolverConfig,
    UniformBound,
};
