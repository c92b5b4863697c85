use std::sync::Arc;

use nalgebra::DMatrix;

use super::b0::{assemble_b0, B0Bundle};
use super::kernels;
use crate::error::{Error, Result};
use crate::fields::{Grid2D, GridFn2D};
use crate::problem::{CoefficientGrid, PdeProblem};
use crate::solver::bundle::{tilde_bundle, DataTerms};
use crate::solver::SolutionBundle;

/// Largest node count for which dense matrices are assembled by default.
pub const DENSE_NODE_LIMIT: usize = 70 * 70;

/// `V22 u` at every node from a full derivative bundle.
pub fn apply_v22(coeffs: &CoefficientGrid, bundle: &SolutionBundle) -> Result<GridFn2D> {
    let n = bundle.u.values().len();
    if coeffs.values().len() != n
        || bundle
            .derivatives()
            .iter()
            .any(|(_, f)| f.values().len() != n)
    {
        return Err(Error::shape(
            "derivative grids and coefficients differ in size",
        ));
    }
    let b = bundle;
    let values = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let v = |f: &GridFn2D| f.values()[k];
            v(&b.uxxyy)
                + c.a21 * v(&b.uxxy)
                + c.a12 * v(&b.uxyy)
                + c.a20 * v(&b.uxx)
                + c.a02 * v(&b.uyy)
                + c.a11 * v(&b.uxy)
                + c.a10 * v(&b.ux)
                + c.a01 * v(&b.uy)
                + c.a00 * v(&b.u)
        })
        .collect();
    GridFn2D::new(bundle.grid().clone(), values)
}

fn rtilde_with(coeffs: &CoefficientGrid, z22: &GridFn2D, b0: &B0Bundle) -> GridFn2D {
    let values = coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let v = |f: &GridFn2D| f.values()[k];
            v(z22)
                - (c.a20 * v(&b0.b0_xx)
                    + c.a02 * v(&b0.b0_yy)
                    + c.a10 * v(&b0.b0_x)
                    + c.a01 * v(&b0.b0_y)
                    + c.a00 * v(&b0.b0))
        })
        .collect();
    GridFn2D::new(z22.grid().clone(), values).expect("same grid")
}

/// `Z22 - V22 B0`. Mixed derivatives of `B0` vanish, so only the terms with
/// `a20, a02, a10, a01, a00` remain.
pub fn compute_rtilde(problem: &PdeProblem, b0: &B0Bundle) -> GridFn2D {
    let grid = b0.b0.grid();
    let coeffs = problem.coeffs.sample(grid);
    rtilde_with(&coeffs, &problem.z22.sample(grid), b0)
}

/// How to represent the eliminated operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Dense `(I + K)` when the grid has at most [`DENSE_NODE_LIMIT`] nodes.
    Auto,
    Dense,
    MatrixFree,
}

/// `(I + K) b22 = g`, the equation left after eliminating `b21`, `b12` and
/// `b11`.
///
/// The matrix-free action builds the homogeneous bundle of `b22` and applies
/// `V22` to it; the dense matrix is assembled entry by entry from the grouped
/// kernels. The two are independent routes to the same operator.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Arc<Grid2D>,
    coeffs: CoefficientGrid,
    dense: Option<DMatrix<f64>>,
    rhs: GridFn2D,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn rhs(&self) -> &GridFn2D {
        &self.rhs
    }

    pub fn coefficients(&self) -> &CoefficientGrid {
        &self.coeffs
    }

    /// The dense matrix `I + K`, rows and columns in grid order.
    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    pub fn into_dense(self) -> Option<DMatrix<f64>> {
        self.dense
    }

    /// `(I + K) b` without forming the matrix.
    pub fn apply(&self, b: &GridFn2D) -> GridFn2D {
        let lower = DataTerms::zero(&self.grid).lower(b);
        apply_v22(&self.coeffs, &tilde_bundle(&lower)).expect("bundle on the operator grid")
    }

    /// `K b`.
    pub fn apply_k(&self, b: &GridFn2D) -> GridFn2D {
        self.apply(b).zip_with(b, |a, v| a - v)
    }

    /// `(I + K) b` through the dense matrix, when assembled.
    pub fn apply_dense(&self, b: &GridFn2D) -> Option<GridFn2D> {
        let m = self.dense.as_ref()?;
        let v = m * nalgebra::DVector::from_column_slice(b.values());
        Some(GridFn2D::new(self.grid.clone(), v.as_slice().to_vec()).expect("square matrix"))
    }

    /// `(I + K) b - g`.
    pub fn residual(&self, b: &GridFn2D) -> GridFn2D {
        self.apply(b).zip_with(&self.rhs, |a, g| a - g)
    }
}

fn check_grid(problem: &PdeProblem, grid: &Grid2D) -> Result<()> {
    if problem.domain != grid.domain() {
        return Err(Error::shape("grid does not cover the problem domain"));
    }
    Ok(())
}

pub(crate) fn want_dense(grid: &Grid2D, repr: Representation) -> Result<bool> {
    match repr {
        Representation::Auto => Ok(grid.len() <= DENSE_NODE_LIMIT),
        Representation::MatrixFree => Ok(false),
        Representation::Dense if grid.len() > DENSE_NODE_LIMIT => Err(Error::invalid(format!(
            "dense assembly limited to {DENSE_NODE_LIMIT} nodes, grid has {}",
            grid.len()
        ))),
        Representation::Dense => Ok(true),
    }
}

/// Assembles the eliminated operator and its right-hand side
/// `g = R~ - V22(data part of the lower unknowns)`.
pub fn assemble_eliminated(
    problem: &PdeProblem,
    grid: &Arc<Grid2D>,
    repr: Representation,
) -> Result<DiscreteOperator> {
    check_grid(problem, grid)?;
    let dense = want_dense(grid, repr)?;
    let coeffs = problem.coeffs.sample(grid);
    let b0 = assemble_b0(&problem.data, grid);
    let rt = rtilde_with(&coeffs, &problem.z22.sample(grid), &b0);
    let known = DataTerms::new(&problem.data, grid).lower(&GridFn2D::zeros(grid.clone()));
    let known = apply_v22(&coeffs, &tilde_bundle(&known))?;
    let rhs = rt.zip_with(&known, |r, k| r - k);
    let dense = dense.then(|| dense_eliminated(grid, &coeffs));
    Ok(DiscreteOperator {
        grid: grid.clone(),
        coeffs,
        dense,
        rhs,
    })
}

/// Fills `row` (length `n1 n2`) with row `(i, j)` of `I + K`.
fn eliminated_row(grid: &Grid2D, coeffs: &CoefficientGrid, i: usize, j: usize, row: &mut [f64]) {
    let (ax, ay) = (grid.x(), grid.y());
    let (xs, ys) = (ax.nodes(), ay.nodes());
    let (n1, n2) = (grid.n1(), grid.n2());
    let (h1, h2) = (ax.length(), ay.length());
    let mwx = ax.full_moment_weights();
    let mwy = ay.full_moment_weights();
    let c = coeffs.at(i, j);
    let (x, y) = (xs[i], ys[j]);

    // b11 and the b21, b12 integral terms are rank-one in (k, l):
    // entry += a_k mwy_l + b_l mwx_k
    let p = kernels::p(c, x, y) / (h1 * h2);
    let a: Vec<f64> = (0..n1)
        .map(|k| p * mwx[k] - ax.partial_weight(i, k) * kernels::ka(c, x, y, xs[k]) / h2)
        .collect();
    let b: Vec<f64> = (0..n2)
        .map(|l| -ay.partial_weight(j, l) * kernels::kc(c, x, y, ys[l]) / h1)
        .collect();
    for l in 0..n2 {
        let r = &mut row[l * n1..(l + 1) * n1];
        for k in 0..n1 {
            r[k] = a[k] * mwy[l] + b[l] * mwx[k];
        }
    }
    // pointwise b21(x), b12(y) terms
    let q = kernels::q(c, y);
    let s = kernels::s(c, x);
    for l in 0..n2 {
        row[l * n1 + i] -= q * mwy[l] / h2;
    }
    for k in 0..n1 {
        row[j * n1 + k] -= s * mwx[k] / h1;
    }
    // direct b22 terms
    for k in 0..=i {
        row[j * n1 + k] += ax.partial_weight(i, k) * kernels::kb(c, x, xs[k]);
    }
    for l in 0..=j {
        row[l * n1 + i] += ay.partial_weight(j, l) * kernels::kd(c, y, ys[l]);
    }
    if i > 0 && j > 0 {
        for l in 0..=j {
            let wl = ay.partial_weight(j, l);
            for k in 0..=i {
                row[l * n1 + k] +=
                    ax.partial_weight(i, k) * wl * kernels::ke(c, x, y, xs[k], ys[l]);
            }
        }
    }
    row[j * n1 + i] += 1.0;
}

fn dense_eliminated(grid: &Grid2D, coeffs: &CoefficientGrid) -> DMatrix<f64> {
    let n = grid.len();
    let n1 = grid.n1();
    let mut data = vec![0.0; n * n];
    let fill = |(r, row): (usize, &mut [f64])| eliminated_row(grid, coeffs, r % n1, r / n1, row);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(n).enumerate().for_each(fill);
    }
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(n).enumerate().for_each(fill);
    // rows were written contiguously; read column-major that is the transpose
    let mut m = DMatrix::from_vec(n, n, data);
    m.transpose_mut();
    m
}

/// The four-block system in `(b11, b21, b12, b22)` before elimination.
///
/// Rows: the `u_y(h1, 0)` condition, the `u_xx(x, h2)` condition at every
/// x node, the `u_yy(h1, y)` condition at every y node, and the equation for
/// `b22` at every grid node. The `u_x(0, h2)` condition is left out: it
/// duplicates the `u_y(h1, 0)` row whenever the data are admissible.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    grid: Arc<Grid2D>,
    matrix: DMatrix<f64>,
    rhs: Vec<f64>,
}

impl CoupledSystem {
    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn into_parts(self) -> (Arc<Grid2D>, DMatrix<f64>, Vec<f64>) {
        (self.grid, self.matrix, self.rhs)
    }

    /// Offsets of the `b21`, `b12` and `b22` blocks in the unknown vector.
    pub fn offsets(&self) -> (usize, usize, usize) {
        let (n1, n2) = (self.grid.n1(), self.grid.n2());
        (1, 1 + n1, 1 + n1 + n2)
    }
}

pub fn assemble_coupled(problem: &PdeProblem, grid: &Arc<Grid2D>) -> Result<CoupledSystem> {
    check_grid(problem, grid)?;
    want_dense(grid, Representation::Dense)?;
    let (ax, ay) = (grid.x(), grid.y());
    let (xs, ys) = (ax.nodes(), ay.nodes());
    let (n1, n2) = (grid.n1(), grid.n2());
    let (h1, h2) = (ax.length(), ay.length());
    let mwx = ax.full_moment_weights();
    let mwy = ay.full_moment_weights();
    let (o21, o12, o22) = (1, 1 + n1, 1 + n1 + n2);
    let size = o22 + grid.len();
    let z = &problem.data;

    let coeffs = problem.coeffs.sample(grid);
    let b0 = assemble_b0(z, grid);
    let rt = rtilde_with(&coeffs, &problem.z22.sample(grid), &b0);

    let mut m = DMatrix::zeros(size, size);
    let mut rhs = vec![0.0; size];

    m[(0, 0)] = h1;
    for k in 0..n1 {
        m[(0, o21 + k)] = mwx[k];
    }
    rhs[0] = z.z01_h1 - z.z01;

    let (lo, hi) = (z.z20.sample(ax), z.z20_h2.sample(ax));
    for i in 0..n1 {
        let r = o21 + i;
        m[(r, o21 + i)] = h2;
        for l in 0..n2 {
            m[(r, o22 + l * n1 + i)] = mwy[l];
        }
        rhs[r] = hi[i] - lo[i];
    }
    let (lo, hi) = (z.z02.sample(ay), z.z02_h1.sample(ay));
    for j in 0..n2 {
        let r = o12 + j;
        m[(r, o12 + j)] = h1;
        for k in 0..n1 {
            m[(r, o22 + j * n1 + k)] = mwx[k];
        }
        rhs[r] = hi[j] - lo[j];
    }

    for j in 0..n2 {
        for i in 0..n1 {
            let r = o22 + j * n1 + i;
            let c = coeffs.at(i, j);
            let (x, y) = (xs[i], ys[j]);
            m[(r, 0)] = kernels::p(c, x, y);
            for k in 0..=i {
                m[(r, o21 + k)] += ax.partial_weight(i, k) * kernels::ka(c, x, y, xs[k]);
                m[(r, o22 + j * n1 + k)] += ax.partial_weight(i, k) * kernels::kb(c, x, xs[k]);
            }
            m[(r, o21 + i)] += kernels::q(c, y);
            for l in 0..=j {
                m[(r, o12 + l)] += ay.partial_weight(j, l) * kernels::kc(c, x, y, ys[l]);
                m[(r, o22 + l * n1 + i)] += ay.partial_weight(j, l) * kernels::kd(c, y, ys[l]);
            }
            m[(r, o12 + j)] += kernels::s(c, x);
            for l in 0..=j {
                let wl = ay.partial_weight(j, l);
                for k in 0..=i {
                    m[(r, o22 + l * n1 + k)] +=
                        ax.partial_weight(i, k) * wl * kernels::ke(c, x, y, xs[k], ys[l]);
                }
            }
            m[(r, r)] += 1.0;
            rhs[r] = rt.at(i, j);
        }
    }
    Ok(CoupledSystem {
        grid: grid.clone(),
        matrix: m,
        rhs,
    })
}
