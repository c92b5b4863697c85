use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ep22_norm, wp22_norm, Grid2D, LpNorm, NormSpec};
use crate::problem::{
    check_data_constraints, default_constraint_tolerance, CheckReport, PdeProblem,
};
use crate::reduction::{assemble_coupled, assemble_eliminated, Representation, DENSE_NODE_LIMIT};

use super::bundle::{
    assemble_solution, b11_alternative, reconstruct_lower, ReducedUnknowns, SolutionBundle,
};
use super::dense::{solve_coupled, solve_dense};
use super::iterate::{solve_neumann, IterationReport};
use super::residual::{length_scale, residual_report, ResidualReport, THRESHOLD_FACTOR};

/// Requested solution method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Successive approximations, falling back to a dense solve on divergence.
    #[default]
    Auto,
    Neumann,
    Dense,
    Coupled,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "neumann" => Ok(Self::Neumann),
            "dense" => Ok(Self::Dense),
            "coupled" => Ok(Self::Coupled),
            _ => Err(Error::invalid(format!(
                "unknown method {s:?}; expected auto, neumann, dense or coupled"
            ))),
        }
    }
}

/// Method that produced the reported solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodUsed {
    Neumann,
    Dense,
    CoupledDense,
}

impl fmt::Display for MethodUsed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Neumann => "neumann",
            Self::Dense => "dense",
            Self::CoupledDense => "coupled-dense",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub method: Method,
    /// Sup-norm update tolerance of the iteration.
    pub tol: f64,
    pub max_iter: usize,
    pub norm: NormSpec,
    /// Solve even when the data fail the admissibility check.
    pub force: bool,
    /// Overrides [`default_constraint_tolerance`].
    pub constraint_tol: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: 1e-10,
            max_iter: 200,
            norm: NormSpec::L2,
            force: false,
            constraint_tol: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: MethodUsed,
    pub iterations: usize,
    pub final_update_norm: f64,
    /// Present whenever the iteration ran, including before a fallback.
    pub neumann: Option<IterationReport>,
    pub warning: Option<String>,
    pub condition_estimate: Option<f64>,
    pub residuals: ResidualReport,
    pub b11: f64,
    /// `b11` recomputed through the `(0, h2)` corner.
    pub b11_alt: f64,
    pub b11_alt_discrepancy: f64,
    pub b11_threshold: f64,
    pub constraints: CheckReport,
    pub norm_p: NormSpec,
    pub solution_norm: f64,
    pub data_norm: f64,
    pub rhs_norm: f64,
    /// `||u||_W / (||Z||_E + ||Z22||_p)`.
    pub m1_estimate: f64,
    pub threads: usize,
    /// Residuals pass and no unresolved divergence.
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub unknowns: ReducedUnknowns,
    pub bundle: SolutionBundle,
    pub report: SolveReport,
}

pub fn thread_count() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Admissibility check with the default tolerance unless overridden.
pub fn constraint_report(problem: &PdeProblem, grid: &Grid2D, tol: Option<f64>) -> CheckReport {
    let tol = tol.unwrap_or_else(|| default_constraint_tolerance(&problem.data, grid));
    check_data_constraints(&problem.data, problem.domain, tol)
}

/// Full pipeline: admissibility gate, solve, reconstruction, residual checks.
pub fn solve(problem: &PdeProblem, grid: &Arc<Grid2D>, opts: &SolveOptions) -> Result<Solution> {
    let constraints = constraint_report(problem, grid, opts.constraint_tol);
    if !constraints.passed && !opts.force {
        return Err(Error::DataConstraints(constraints));
    }

    let mut neumann = None;
    let mut warning = None;
    let mut condition = None;
    let mut solver_tol = 0.0;
    let (unknowns, method) = match opts.method {
        Method::Coupled => {
            let (h, cond) = solve_coupled(assemble_coupled(problem, grid)?)?;
            condition = Some(cond);
            (h, MethodUsed::CoupledDense)
        }
        Method::Dense => {
            let op = assemble_eliminated(problem, grid, Representation::Dense)?;
            let (b22, cond) = solve_dense(&op)?;
            condition = Some(cond);
            (reconstruct_lower(&problem.data, &b22), MethodUsed::Dense)
        }
        Method::Neumann | Method::Auto => {
            let op = assemble_eliminated(problem, grid, Representation::MatrixFree)?;
            let (b22, it) = solve_neumann(&op, opts.tol, opts.max_iter);
            let diverged = it.diverged;
            let iterations = it.iterations;
            neumann = Some(it);
            if !diverged {
                solver_tol = opts.tol;
                (reconstruct_lower(&problem.data, &b22), MethodUsed::Neumann)
            } else if opts.method == Method::Auto && grid.len() <= DENSE_NODE_LIMIT {
                let op = assemble_eliminated(problem, grid, Representation::Dense)?;
                let (b22, cond) = solve_dense(&op)?;
                condition = Some(cond);
                warning = Some(format!(
                    "successive approximations diverged after {iterations} iterations; \
                     dense solve used instead"
                ));
                (reconstruct_lower(&problem.data, &b22), MethodUsed::Dense)
            } else {
                warning = Some(format!(
                    "successive approximations diverged after {iterations} iterations; \
                     returning the last iterate"
                ));
                (reconstruct_lower(&problem.data, &b22), MethodUsed::Neumann)
            }
        }
    };

    let bundle = assemble_solution(&problem.data, &unknowns);
    let residuals = residual_report(problem, &bundle, opts.norm, solver_tol);
    let b11_alt = b11_alternative(&problem.data, &unknowns);
    let b11_alt_discrepancy = (b11_alt - unknowns.b11).abs();
    let b11_threshold = THRESHOLD_FACTOR * length_scale(problem) * residuals.quadrature_error
        + 1e-10 * (1.0 + problem.data.scale(grid));

    let solution_norm = wp22_norm(&bundle, opts.norm);
    let data_norm = ep22_norm(&problem.data, grid, opts.norm);
    let rhs_norm = problem.z22.sample(grid).lp_norm(opts.norm);
    let denom = data_norm + rhs_norm;
    let m1_estimate = if denom > 0.0 {
        solution_norm / denom
    } else {
        0.0
    };

    let unresolved = method == MethodUsed::Neumann && neumann.as_ref().is_some_and(|n| n.diverged);
    let (iterations, final_update_norm) = match (&neumann, method) {
        (Some(n), MethodUsed::Neumann) => (n.iterations, n.final_update_norm),
        _ => (0, 0.0),
    };
    let passed = residuals.passed && !unresolved;
    let report = SolveReport {
        method,
        iterations,
        final_update_norm,
        neumann,
        warning,
        condition_estimate: condition,
        residuals,
        b11: unknowns.b11,
        b11_alt,
        b11_alt_discrepancy,
        b11_threshold,
        constraints,
        norm_p: opts.norm,
        solution_norm,
        data_norm,
        rhs_norm,
        m1_estimate,
        threads: thread_count(),
        passed,
    };
    Ok(Solution {
        unknowns,
        bundle,
        report,
    })
}

/// Empirical bound `max ||u|| / ||data||` over sampled problems.
#[derive(Debug, Clone, Serialize)]
pub struct M1Estimate {
    pub max: f64,
    pub min: f64,
    pub ratios: Vec<f64>,
    /// Trials left out, with the reason.
    pub excluded: Vec<(usize, String)>,
}

/// Solves `trials` problems drawn from `sampler` and collects `m1` ratios.
/// Trials whose solve fails or diverges without fallback are excluded.
pub fn estimate_m1(
    mut sampler: impl FnMut(usize) -> PdeProblem,
    grid: &Arc<Grid2D>,
    trials: usize,
    opts: &SolveOptions,
) -> M1Estimate {
    let mut ratios = Vec::with_capacity(trials);
    let mut excluded = Vec::new();
    for t in 0..trials {
        let problem = sampler(t);
        match solve(&problem, grid, opts) {
            Ok(s)
                if s.report.neumann.as_ref().is_some_and(|n| n.diverged)
                    && s.report.method == MethodUsed::Neumann =>
            {
                excluded.push((t, "successive approximations diverged".to_string()));
            }
            Ok(s) => ratios.push(s.report.m1_estimate),
            Err(e) => excluded.push((t, e.to_string())),
        }
    }
    let max = ratios.iter().copied().fold(f64::NAN, f64::max);
    let min = ratios.iter().copied().fold(f64::NAN, f64::min);
    M1Estimate {
        max,
        min,
        ratios,
        excluded,
    }
}
