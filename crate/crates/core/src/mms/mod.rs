//! Manufactured solutions and an independent finite-difference oracle.

mod cases;
mod exact;
mod fd;
mod study;

pub use cases::{
    classical_traces, make_mms, named_case, nonclassical_traces, random_data, random_problem,
    random_rhs, smooth_coefficients, step_a00, MmsCase, CASE_NAMES,
};
pub use exact::{ExactSolution, Profile, Separable, SymbolicSolution};
pub use fd::{fd_oracle, FD_NODE_LIMIT};
pub use study::{
    convergence_study, sup_error, ConvergenceRow, ConvergenceTable, Discretization, EXACT_TOL,
};
