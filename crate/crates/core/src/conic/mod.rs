//! Embedded convex conic solver (zero, nonnegative, second-order, and
//! exponential cones) with branch-and-bound for binary variables.

pub mod cones;
mod mip;
mod problem;
mod solver;

pub use cones::ConeTag;
pub use mip::solve_mixed;
pub use problem::{ConicProblem, Expr};
pub use solver::{
    solve_continuous, ConicSolution, MipStats, SolveSettings, SolveStatus, WarmStart, Workspace,
};
