//! Dense two-phase primal simplex and best-first branch-and-bound.
//!
//! Programs are in minimization form `min c·x  s.t.  A·x <= b,  lb <= x <= ub`.
//! Bland's lowest-index rule picks both the entering and the leaving column,
//! so every solve is cycle-free and bit-for-bit deterministic.

mod branch;
mod check;
mod program;
mod simplex;

pub use branch::{solve_milp, solve_milp_traced, BranchDirection, NodeRecord};
pub use check::check_solution;
pub use program::{LinearProgram, MilpSolution, SolveStatus, SolverError, SolverOptions, Row};
pub use simplex::solve_lp;

#[doc(hidden)]
pub use simplex::solve_lp_with_history;
