use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fields::stencil::fd_weights;
use crate::fields::{Grid2D, GridFn2D};
use crate::problem::{nonclassical_to_classical, PdeProblem};
use crate::solver::DenseLu;

/// Largest grid the dense finite-difference oracle accepts.
pub const FD_NODE_LIMIT: usize = 65 * 65;

/// Three-point weights for derivatives of order 0, 1, 2 at `nodes[i]`.
fn local_weights(nodes: &[f64], i: usize) -> [[f64; 3]; 3] {
    let pts = [nodes[i - 1], nodes[i], nodes[i + 1]];
    let w1 = fd_weights(nodes[i], &pts, 1);
    let w2 = fd_weights(nodes[i], &pts, 2);
    [
        [0.0, 1.0, 0.0],
        [w1[0], w1[1], w1[2]],
        [w2[0], w2[1], w2[2]],
    ]
}

/// Finite-difference solution of the classical Dirichlet problem whose edge
/// data are converted from the nonclassical data.
///
/// Interior rows apply tensor-product three-point stencils to every term of
/// the operator; boundary rows fix the converted traces, with the `x = 0`
/// and `x = h1` edges taking the corners.
pub fn fd_oracle(problem: &PdeProblem, grid: &Arc<Grid2D>) -> Result<GridFn2D> {
    if grid.len() > FD_NODE_LIMIT {
        return Err(Error::invalid(format!(
            "finite-difference oracle limited to {FD_NODE_LIMIT} nodes"
        )));
    }
    let cd = nonclassical_to_classical(&problem.data, grid);
    let coeffs = problem.coeffs.sample(grid);
    let z22 = problem.z22.sample(grid);
    let (xs, ys) = (grid.x().nodes(), grid.y().nodes());
    let (n1, n2) = (grid.n1(), grid.n2());
    let n = grid.len();
    let mut m = DMatrix::zeros(n, n);
    let mut rhs = vec![0.0; n];
    for j in 0..n2 {
        for i in 0..n1 {
            let r = j * n1 + i;
            if i == 0 || i == n1 - 1 {
                m[(r, r)] = 1.0;
                rhs[r] = if i == 0 {
                    cd.phi1.eval(ys[j])
                } else {
                    cd.phi2.eval(ys[j])
                };
                continue;
            }
            if j == 0 || j == n2 - 1 {
                m[(r, r)] = 1.0;
                rhs[r] = if j == 0 {
                    cd.psi1.eval(xs[i])
                } else {
                    cd.psi2.eval(xs[i])
                };
                continue;
            }
            let wx = local_weights(xs, i);
            let wy = local_weights(ys, j);
            let c = coeffs.at(i, j);
            let a = [
                [c.a00, c.a01, c.a02],
                [c.a10, c.a11, c.a12],
                [c.a20, c.a21, 1.0],
            ];
            for (p, row_p) in a.iter().enumerate() {
                for (q, &apq) in row_p.iter().enumerate() {
                    if apq == 0.0 {
                        continue;
                    }
                    for (dl, &wyl) in wy[q].iter().enumerate() {
                        for (dk, &wxk) in wx[p].iter().enumerate() {
                            let col = (j + dl - 1) * n1 + (i + dk - 1);
                            m[(r, col)] += apq * wxk * wyl;
                        }
                    }
                }
            }
            rhs[r] = z22.at(i, j);
        }
    }
    let lu = DenseLu::new(m)?;
    let u = lu.solve(&rhs);
    GridFn2D::new(grid.clone(), u.as_slice().to_vec())
}
