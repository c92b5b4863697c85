use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::fields::{GridFn1D, GridFn2D};
use crate::reduction::{CoupledSystem, DiscreteOperator};

use super::bundle::ReducedUnknowns;

/// Condition numbers above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e15;

/// LU factorization with partial pivoting and a 1-norm condition estimate.
pub struct DenseLu {
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
}

impl DenseLu {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let norm = one_norm(&matrix);
        let lu = matrix.lu();
        if !lu.is_invertible() {
            return Err(Error::Singular {
                condition: f64::INFINITY,
            });
        }
        let mut out = Self {
            lu,
            condition: f64::NAN,
        };
        let inv_norm = out.inverse_one_norm();
        out.condition = norm * inv_norm;
        if !out.condition.is_finite() || out.condition > SINGULAR_CONDITION {
            return Err(Error::Singular {
                condition: out.condition,
            });
        }
        Ok(out)
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        self.lu
            .solve(&DVector::from_column_slice(b))
            .expect("factorization is invertible")
    }

    /// Solves `A^T x = b` from the factors `P A = L U`.
    fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let l = self.lu.l();
        let u = self.lu.u();
        let z = u.tr_solve_upper_triangular(b).expect("nonzero pivots");
        let mut w = l.tr_solve_lower_triangular(&z).expect("unit diagonal");
        self.lu.p().inv_permute_rows(&mut w);
        w
    }

    /// Hager's estimate of `||A^-1||_1`.
    fn inverse_one_norm(&self) -> f64 {
        let n = self.lu.l().nrows();
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut est = 0.0;
        let mut last = usize::MAX;
        for _ in 0..5 {
            let y = self.lu.solve(&x).expect("invertible");
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let sign = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose(&sign);
            let (j, zmax) = z.iter().enumerate().fold((0, 0.0f64), |(bj, bv), (k, v)| {
                if v.abs() > bv {
                    (k, v.abs())
                } else {
                    (bj, bv)
                }
            });
            if zmax <= z.dot(&x) || j == last {
                break;
            }
            x = DVector::zeros(n);
            x[j] = 1.0;
            last = j;
        }
        est
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Direct solve of `(I + K) b = g`; returns `b22` and the condition estimate.
pub fn solve_dense(op: &DiscreteOperator) -> Result<(GridFn2D, f64)> {
    let m = op
        .dense()
        .ok_or_else(|| Error::invalid("operator was assembled without a dense matrix"))?;
    let lu = DenseLu::new(m.clone())?;
    let b = lu.solve(op.rhs().values());
    Ok((
        GridFn2D::new(op.grid().clone(), b.as_slice().to_vec())?,
        lu.condition(),
    ))
}

/// Direct solve of the coupled four-block system.
pub fn solve_coupled(system: CoupledSystem) -> Result<(ReducedUnknowns, f64)> {
    let (o21, o12, o22) = system.offsets();
    let (grid, matrix, rhs) = system.into_parts();
    let lu = DenseLu::new(matrix)?;
    let s = lu.solve(&rhs);
    let s = s.as_slice();
    let h = ReducedUnknowns {
        b11: s[0],
        b21: GridFn1D::new(grid.x().clone(), s[o21..o12].to_vec())?,
        b12: GridFn1D::new(grid.y().clone(), s[o12..o22].to_vec())?,
        b22: GridFn2D::new(grid.clone(), s[o22..].to_vec())?,
    };
    Ok((h, lu.condition()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_solve_and_condition() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 2.0, 1.0, 0.5, //
                3.0, -1.0, 0.0, 2.0, //
                1.0, 1.0, 4.0, 0.0, //
                0.2, 0.0, -2.0, 1.0,
            ],
        );
        let lu = DenseLu::new(a.clone()).unwrap();
        let b = DVector::from_column_slice(&[1.0, -2.0, 0.5, 3.0]);
        let x = lu.solve_transpose(&b);
        assert!((a.transpose() * &x - &b).amax() < 1e-13);
        let inv = a.clone().try_inverse().unwrap();
        let exact = one_norm(&a) * one_norm(&inv);
        let est = lu.condition();
        assert!(
            est <= exact * (1.0 + 1e-12) && est >= exact / 4.0,
            "{est} vs {exact}"
        );
    }

    #[test]
    fn identity_is_perfectly_conditioned() {
        let lu = DenseLu::new(DMatrix::identity(6, 6)).unwrap();
        assert!((lu.condition() - 1.0).abs() < 1e-15);
        let g = [1.0, -2.0, 3.5, 0.0, 7.0, 1e-3];
        assert_eq!(lu.solve(&g).as_slice(), &g);
    }

    #[test]
    fn singular_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(DenseLu::new(a), Err(Error::Singular { .. })));
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-17]);
        assert!(matches!(DenseLu::new(a), Err(Error::Singular { .. })));
    }
}
