//! The dual semidefinite program and its solver.
//!
//! maximize `Re <C, Y>` subject to
//! `[[Q0, vec C], [vec C^H, 1]] >= 0`, `tr(Theta_k Q0) = delta_k` for every
//! offset `|k_i| <= n - 1`, and `|C_k| <= lambda`.

mod constraints;
mod gap;
mod psd;
mod solver;

pub use constraints::{assemble_trace_constraints, TraceConstraints, TraceFamily};
pub use gap::{duality_gap, duality_gap_with_tolerance, primal_objective, DEFAULT_FEASIBILITY_TOL};
pub use psd::{min_eigenvalue, psd_project};
pub use solver::{solve_dual_sdp, Diagnostics, SdpProblem, SdpSolution, SolverOptions};
