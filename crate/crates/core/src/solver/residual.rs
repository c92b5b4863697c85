use serde::Serialize;

use crate::fields::{tensor_apply, AxisOp, GridFn2D, LpNorm, NormSpec};
use crate::problem::{quadrature_error_estimate, PdeProblem, Residual};
use crate::reduction::apply_v22;

use super::bundle::SolutionBundle;

/// Names of the eleven boundary residuals, in data order.
pub const BC_NAMES: [&str; 11] = [
    "u(0,0)",
    "u_x(0,0)",
    "u_y(0,0)",
    "u_xx(x,0)",
    "u_yy(0,y)",
    "u(h1,0)",
    "u_y(h1,0)",
    "u_yy(h1,y)",
    "u(0,h2)",
    "u_x(0,h2)",
    "u_xx(x,h2)",
];

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    /// `||V22 u - Z22||_p`.
    pub pde: f64,
    /// Absolute trace errors; sup over nodes for the function components.
    pub bc: Vec<Residual>,
    /// Sup distance between `u` and its reconstruction from the bundle's own
    /// corner values, edge traces and `u_xxyy`.
    pub representation: f64,
    pub pde_threshold: f64,
    pub bc_threshold: f64,
    pub representation_threshold: f64,
    /// Richardson estimate of the quadrature error in the data integrals.
    pub quadrature_error: f64,
    pub passed: bool,
}

impl ResidualReport {
    pub fn bc(&self, name: &str) -> Option<f64> {
        self.bc.iter().find(|r| r.name == name).map(|r| r.value)
    }

    pub fn max_bc(&self) -> f64 {
        self.bc.iter().fold(0.0, |m, r| m.max(r.value))
    }
}

/// Threshold multiplier over the quadrature error estimate.
pub const THRESHOLD_FACTOR: f64 = 10.0;

/// Scale converting moment-integral errors into trace and `b11` errors.
pub fn length_scale(problem: &PdeProblem) -> f64 {
    let (h1, h2) = (problem.domain.h1(), problem.domain.h2());
    1f64.max(1.0 / h1).max(1.0 / h2).max(1.0 / (h1 * h2))
}

/// `u` rebuilt as `u(0,0) + x u_x(0,0) + y u_y(0,0) + xy u_xy(0,0)
/// + M_x u_xx(., 0) + y M_x u_xxy(., 0) + M_y u_yy(0, .) + x M_y u_xyy(0, .)
/// + M_x M_y u_xxyy`.
pub fn reconstruct_from_traces(b: &SolutionBundle) -> GridFn2D {
    let grid = b.grid().clone();
    let (ax, ay) = (grid.x(), grid.y());
    let (xs, ys) = (ax.nodes(), ay.nodes());
    let m_xx = ax.moments(b.uxx.row(0));
    let m_xxy = ax.moments(b.uxxy.row(0));
    let m_yy = ay.moments(&b.uyy.column(0));
    let m_xyy = ay.moments(&b.uxyy.column(0));
    let mm = tensor_apply(&b.uxxyy, AxisOp::Moment, AxisOp::Moment);
    let (u0, ux0, uy0, uxy0) = (b.u.at(0, 0), b.ux.at(0, 0), b.uy.at(0, 0), b.uxy.at(0, 0));
    GridFn2D::from_index_fn(grid.clone(), |i, j| {
        let (x, y) = (xs[i], ys[j]);
        u0 + x * ux0
            + y * uy0
            + x * y * uxy0
            + m_xx[i]
            + y * m_xxy[i]
            + m_yy[j]
            + x * m_xyy[j]
            + mm.at(i, j)
    })
}

/// Checks a bundle against the equation and all eleven boundary conditions.
///
/// `solver_tol` is the stopping tolerance of the solve that produced the
/// bundle (0 for direct solves); it widens the equation threshold.
pub fn residual_report(
    problem: &PdeProblem,
    bundle: &SolutionBundle,
    norm: NormSpec,
    solver_tol: f64,
) -> ResidualReport {
    let grid = bundle.grid().clone();
    let z = &problem.data;
    let (ax, ay) = (grid.x(), grid.y());
    let (n1, n2) = (grid.n1(), grid.n2());

    let z22 = problem.z22.sample(&grid);
    let v = apply_v22(&problem.coeffs.sample(&grid), bundle).expect("bundle on the grid");
    let pde = v.zip_with(&z22, |a, b| a - b).lp_norm(norm);

    let sup_x = |f: &GridFn2D, j: usize, target: &[f64]| {
        f.row(j)
            .iter()
            .zip(target)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let sup_y = |f: &GridFn2D, i: usize, target: &[f64]| {
        f.column(i)
            .iter()
            .zip(target)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let (last_i, last_j) = (n1 - 1, n2 - 1);
    let values = [
        (bundle.u.at(0, 0) - z.z00).abs(),
        (bundle.ux.at(0, 0) - z.z10).abs(),
        (bundle.uy.at(0, 0) - z.z01).abs(),
        sup_x(&bundle.uxx, 0, &z.z20.sample(ax)),
        sup_y(&bundle.uyy, 0, &z.z02.sample(ay)),
        (bundle.u.at(last_i, 0) - z.z00_h1).abs(),
        (bundle.uy.at(last_i, 0) - z.z01_h1).abs(),
        sup_y(&bundle.uyy, last_i, &z.z02_h1.sample(ay)),
        (bundle.u.at(0, last_j) - z.z00_h2).abs(),
        (bundle.ux.at(0, last_j) - z.z10_h2).abs(),
        sup_x(&bundle.uxx, last_j, &z.z20_h2.sample(ax)),
    ];
    let bc: Vec<Residual> = BC_NAMES
        .iter()
        .zip(values)
        .map(|(n, v)| Residual {
            name: n.to_string(),
            value: v,
        })
        .collect();

    let representation = reconstruct_from_traces(bundle).max_abs_diff(&bundle.u);

    let quad = quadrature_error_estimate(z, &grid);
    let data_scale = z.scale(&grid);
    let bc_threshold = THRESHOLD_FACTOR * length_scale(problem) * quad + 1e-10 * (1.0 + data_scale);
    let pde_threshold =
        THRESHOLD_FACTOR * quad + THRESHOLD_FACTOR * solver_tol + 1e-8 * (1.0 + z22.sup_norm());
    let representation_threshold = 1e-9 * (1.0 + bundle.u.sup_norm());
    let passed = pde <= pde_threshold
        && bc.iter().all(|r| r.value <= bc_threshold)
        && representation <= representation_threshold;
    ResidualReport {
        pde,
        bc,
        representation,
        pde_threshold,
        bc_threshold,
        representation_threshold,
        quadrature_error: quad,
        passed,
    }
}
