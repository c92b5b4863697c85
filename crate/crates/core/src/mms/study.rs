use std::sync::Arc;

use serde::Serialize;

use super::cases::MmsCase;
use super::fd::fd_oracle;
use crate::error::{Error, Result};
use crate::fields::{Grid2D, GridFn2D};
use crate::solver::{solve, SolveOptions};

/// Errors at or below this are treated as exact.
pub const EXACT_TOL: f64 = 1e-12;

/// Which discretization a study runs.
#[derive(Debug, Clone)]
pub enum Discretization {
    IntegralEquation(SolveOptions),
    FiniteDifference,
}

impl Discretization {
    pub fn solve(&self, case: &MmsCase, grid: &Arc<Grid2D>) -> Result<GridFn2D> {
        match self {
            Discretization::IntegralEquation(opts) => {
                Ok(solve(&case.problem, grid, opts)?.bundle.u)
            }
            Discretization::FiniteDifference => fd_oracle(&case.problem, grid),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub sup_error: f64,
    /// `log(e_prev / e) / log(h_prev / h)`; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub case: String,
    pub rows: Vec<ConvergenceRow>,
    /// Every error is at or below [`EXACT_TOL`].
    pub exact: bool,
    /// Errors decrease strictly with refinement.
    pub monotone: bool,
}

impl ConvergenceTable {
    pub fn min_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::min)
    }

    pub fn max_order(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.order).reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,h,sup_error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.16e}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{order}\n",
                r.n, r.h, r.sup_error
            ));
        }
        s
    }
}

/// Sup error against `u*` at the nodes of `grid`.
pub fn sup_error(case: &MmsCase, u: &GridFn2D) -> f64 {
    let exact = GridFn2D::from_fn(u.grid().clone(), |x, y| case.u_star.value(x, y));
    u.max_abs_diff(&exact)
}

/// Errors against `u*` over a sequence of `n x n` grids.
pub fn convergence_study(
    case: &MmsCase,
    sizes: &[usize],
    method: &Discretization,
) -> Result<ConvergenceTable> {
    if sizes.len() < 3 {
        return Err(Error::invalid(
            "a convergence study needs at least three grid sizes",
        ));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let grid = case.grid(n)?;
        let u = method.solve(case, &grid)?;
        let e = sup_error(case, &u);
        let h = grid.x().max_step().max(grid.y().max_step());
        let order = rows
            .last()
            .map(|prev| (prev.sup_error / e).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow {
            n,
            h,
            sup_error: e,
            order,
        });
    }
    let exact = rows.iter().all(|r| r.sup_error <= EXACT_TOL);
    let monotone = rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error);
    Ok(ConvergenceTable {
        case: case.name.clone(),
        rows,
        exact,
        monotone,
    })
}
