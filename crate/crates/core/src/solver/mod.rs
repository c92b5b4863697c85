//! Solving the reduced equations and rebuilding the solution.

pub(crate) mod bundle;
mod dense;
mod iterate;
mod pipeline;
mod residual;

pub use bundle::{
    assemble_solution, b11_alternative, reconstruct_lower, tilde_bundle, ReducedUnknowns,
    SolutionBundle,
};
pub use dense::{solve_coupled, solve_dense, DenseLu, SINGULAR_CONDITION};
pub use iterate::{solve_neumann, IterationReport, GROWTH_LIMIT};
pub use pipeline::{
    constraint_report, estimate_m1, solve, thread_count, M1Estimate, Method, MethodUsed, Solution,
    SolveOptions, SolveReport,
};
pub use residual::{
    length_scale, reconstruct_from_traces, residual_report, ResidualReport, BC_NAMES,
    THRESHOLD_FACTOR,
};
