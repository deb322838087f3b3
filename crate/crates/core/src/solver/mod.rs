//! Self-contained convex solvers: dual ascent for the profile subproblem and a
//! barrier interior-point method for the incremental trajectory problem.

pub mod barrier;
pub mod dual;
mod linalg;
pub mod qcqp;

pub use barrier::{BarrierOptions, ConvexQcqp, SolverReport, SparseQuadratic, Termination};
pub use dual::{dual_ascent, DualEvaluation, DualMethod, DualOptions, DualReport, DualTermination};
pub use qcqp::{solve_concave_qcqp, ConcaveQuadratic, DiskChainConstraintSet, SlotBudget, SlotObjective};
