use std::sync::Arc;

use crate::fields::{tensor_apply, AxisOp, Grid2D, GridFn1D, GridFn2D};
use crate::problem::NonclassicalData;
use crate::reduction::assemble_b0;

/// The unknown quadruple `(b11, b21(x), b12(y), b22(x, y))`.
///
/// `b11 = u_xy(0,0)`, `b21 = u_xxy(x,0)`, `b12 = u_xyy(0,y)`, `b22 = u_xxyy`.
#[derive(Debug, Clone)]
pub struct ReducedUnknowns {
    pub b11: f64,
    pub b21: GridFn1D,
    pub b12: GridFn1D,
    pub b22: GridFn2D,
}

impl ReducedUnknowns {
    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        Self {
            b11: 0.0,
            b21: GridFn1D::zeros(grid.x().clone()),
            b12: GridFn1D::zeros(grid.y().clone()),
            b22: GridFn2D::zeros(grid.clone()),
        }
    }
}

/// A solution on the grid together with every derivative `D_x^i D_y^j u`,
/// `i, j <= 2`.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub u: GridFn2D,
    pub ux: GridFn2D,
    pub uy: GridFn2D,
    pub uxx: GridFn2D,
    pub uyy: GridFn2D,
    pub uxy: GridFn2D,
    pub uxxy: GridFn2D,
    pub uxyy: GridFn2D,
    pub uxxyy: GridFn2D,
}

impl SolutionBundle {
    pub const NAMES: [&'static str; 9] = [
        "u", "ux", "uy", "uxx", "uyy", "uxy", "uxxy", "uxyy", "uxxyy",
    ];

    pub fn zeros(grid: &Arc<Grid2D>) -> Self {
        let z = || GridFn2D::zeros(grid.clone());
        Self {
            u: z(),
            ux: z(),
            uy: z(),
            uxx: z(),
            uyy: z(),
            uxy: z(),
            uxxy: z(),
            uxyy: z(),
            uxxyy: z(),
        }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        self.u.grid()
    }

    pub fn derivatives(&self) -> [(&'static str, &GridFn2D); 9] {
        [
            ("u", &self.u),
            ("ux", &self.ux),
            ("uy", &self.uy),
            ("uxx", &self.uxx),
            ("uyy", &self.uyy),
            ("uxy", &self.uxy),
            ("uxxy", &self.uxxy),
            ("uxyy", &self.uxyy),
            ("uxxyy", &self.uxxyy),
        ]
    }

    fn derivatives_mut(&mut self) -> [&mut GridFn2D; 9] {
        [
            &mut self.u,
            &mut self.ux,
            &mut self.uy,
            &mut self.uxx,
            &mut self.uyy,
            &mut self.uxy,
            &mut self.uxxy,
            &mut self.uxyy,
            &mut self.uxxyy,
        ]
    }

    /// `a self + b other`, grid by grid.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Self {
        let mut out = f.clone();
        for (dst, (_, src)) in out.derivatives_mut().into_iter().zip(g.derivatives()) {
            for (d, s) in dst.values_mut().iter_mut().zip(src.values()) {
                *d = a * *d + b * s;
            }
        }
        out
    }
}

/// The part of the representation that vanishes with the data:
/// `xy b11 + y M_x b21 + x M_y b12 + M_x M_y b22` and its derivatives, where
/// `M` is the running first moment and `C` the running integral.
pub fn tilde_bundle(h: &ReducedUnknowns) -> SolutionBundle {
    let grid = h.b22.grid().clone();
    let (ax, ay) = (grid.x(), grid.y());
    let xs = ax.nodes();
    let ys = ay.nodes();
    let b21 = h.b21.values();
    let b12 = h.b12.values();
    let c21 = ax.cumulative(b21);
    let m21 = ax.moments(b21);
    let c12 = ay.cumulative(b12);
    let m12 = ay.moments(b12);
    let b11 = h.b11;

    use AxisOp::{Cumulative as C, Identity as I, Moment as M};
    let t = |ox, oy| tensor_apply(&h.b22, ox, oy);
    let (cx, cy, mx, my) = (t(C, I), t(I, C), t(M, I), t(I, M));
    let (cxcy, cxmy, mxcy, mxmy) = (t(C, C), t(C, M), t(M, C), t(M, M));

    let make = |f: &dyn Fn(usize, usize, usize) -> f64| {
        let n1 = grid.n1();
        GridFn2D::from_index_fn(grid.clone(), |i, j| f(i, j, j * n1 + i))
    };
    let v = |g: &GridFn2D, k: usize| g.values()[k];
    SolutionBundle {
        u: make(&|i, j, k| xs[i] * ys[j] * b11 + ys[j] * m21[i] + xs[i] * m12[j] + v(&mxmy, k)),
        ux: make(&|i, j, k| ys[j] * b11 + ys[j] * c21[i] + m12[j] + v(&cxmy, k)),
        uy: make(&|i, j, k| xs[i] * b11 + m21[i] + xs[i] * c12[j] + v(&mxcy, k)),
        uxx: make(&|i, j, k| ys[j] * b21[i] + v(&my, k)),
        uyy: make(&|i, j, k| xs[i] * b12[j] + v(&mx, k)),
        uxy: make(&|i, j, k| b11 + c21[i] + c12[j] + v(&cxcy, k)),
        uxxy: make(&|i, _, k| b21[i] + v(&cy, k)),
        uxyy: make(&|_, j, k| b12[j] + v(&cx, k)),
        uxxyy: h.b22.clone(),
    }
}

/// The full solution bundle `u = B0 + tilde(h)`; derivatives come from the
/// integral formulas, never from differencing `u`.
pub fn assemble_solution(z: &NonclassicalData, h: &ReducedUnknowns) -> SolutionBundle {
    let grid = h.b22.grid().clone();
    let b0 = assemble_b0(z, &grid);
    let mut out = tilde_bundle(h);
    let add = |dst: &mut GridFn2D, src: &GridFn2D| {
        for (d, s) in dst.values_mut().iter_mut().zip(src.values()) {
            *d += s;
        }
    };
    add(&mut out.u, &b0.b0);
    add(&mut out.ux, &b0.b0_x);
    add(&mut out.uy, &b0.b0_y);
    add(&mut out.uxx, &b0.b0_xx);
    add(&mut out.uyy, &b0.b0_yy);
    out
}

/// Data parts of the lower unknowns: `(Z20^(h2) - Z20) / h2` on x,
/// `(Z02^(h1) - Z02) / h1` on y, and `Z01^(h1) - Z01`.
#[derive(Debug, Clone)]
pub(crate) struct DataTerms {
    pub d21: Vec<f64>,
    pub d12: Vec<f64>,
    pub dz01: f64,
}

impl DataTerms {
    pub fn zero(grid: &Grid2D) -> Self {
        Self {
            d21: vec![0.0; grid.n1()],
            d12: vec![0.0; grid.n2()],
            dz01: 0.0,
        }
    }

    pub fn new(z: &NonclassicalData, grid: &Grid2D) -> Self {
        let (h1, h2) = (grid.domain().h1(), grid.domain().h2());
        let (ax, ay) = (grid.x(), grid.y());
        let lo = z.z20.sample(ax);
        let hi = z.z20_h2.sample(ax);
        let d21 = hi.iter().zip(&lo).map(|(a, b)| (a - b) / h2).collect();
        let lo = z.z02.sample(ay);
        let hi = z.z02_h1.sample(ay);
        let d12 = hi.iter().zip(&lo).map(|(a, b)| (a - b) / h1).collect();
        Self {
            d21,
            d12,
            dz01: z.z01_h1 - z.z01,
        }
    }

    /// The lower unknowns for a given `b22`.
    pub fn lower(&self, b22: &GridFn2D) -> ReducedUnknowns {
        let grid = b22.grid();
        let (h1, h2) = (grid.domain().h1(), grid.domain().h2());
        let (ax, ay) = (grid.x(), grid.y());
        let mwx = ax.full_moment_weights();
        let mwy = ay.full_moment_weights();
        let (n1, n2) = (grid.n1(), grid.n2());
        let vals = b22.values();
        let b21: Vec<f64> = (0..n1)
            .map(|i| self.d21[i] - (0..n2).map(|l| mwy[l] * vals[l * n1 + i]).sum::<f64>() / h2)
            .collect();
        let b12: Vec<f64> = (0..n2)
            .map(|j| self.d12[j] - (0..n1).map(|k| mwx[k] * vals[j * n1 + k]).sum::<f64>() / h1)
            .collect();
        let b11 = self.dz01 / h1 - ax.full_moment(&b21) / h1;
        ReducedUnknowns {
            b11,
            b21: GridFn1D::new(ax.clone(), b21).expect("axis length"),
            b12: GridFn1D::new(ay.clone(), b12).expect("axis length"),
            b22: b22.clone(),
        }
    }
}

/// `b21`, `b12` and `b11` from `b22` and the data:
///
/// * `b21(x) = (Z20^(h2) - Z20)(x) / h2 - (1/h2) int_0^h2 (h2 - b) b22(x, b) db`
/// * `b12(y) = (Z02^(h1) - Z02)(y) / h1 - (1/h1) int_0^h1 (h1 - a) b22(a, y) da`
/// * `b11 = (Z01^(h1) - Z01) / h1 - (1/h1) int_0^h1 (h1 - a) b21(a) da`
pub fn reconstruct_lower(z: &NonclassicalData, b22: &GridFn2D) -> ReducedUnknowns {
    DataTerms::new(z, b22.grid()).lower(b22)
}

/// `b11` through the other corner:
/// `(Z10^(h2) - Z10) / h2 - (1/h2) int_0^h2 (h2 - b) b12(b) db`.
pub fn b11_alternative(z: &NonclassicalData, h: &ReducedUnknowns) -> f64 {
    let ay = h.b12.axis();
    let h2 = ay.length();
    (z.z10_h2 - z.z10) / h2 - ay.full_moment(h.b12.values()) / h2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{build_grid, Domain, Field1D};

    fn grid(d: Domain, n: usize) -> Arc<Grid2D> {
        Arc::new(build_grid(d, n, n, &[], &[]).unwrap())
    }

    #[test]
    fn zero_bundle_from_zero_inputs() {
        let g = grid(Domain::unit(), 7);
        let b = assemble_solution(&NonclassicalData::zero(), &ReducedUnknowns::zeros(&g));
        for (_, f) in b.derivatives() {
            assert_eq!(f.sup_norm(), 0.0);
        }
    }

    #[test]
    fn bilinear_from_b11() {
        let g = grid(Domain::new(1.3, 0.8).unwrap(), 9);
        let mut h = ReducedUnknowns::zeros(&g);
        h.b11 = 1.0;
        let b = assemble_solution(&NonclassicalData::zero(), &h);
        let xy = GridFn2D::from_fn(g.clone(), |x, y| x * y);
        assert!(b.u.max_abs_diff(&xy) < 1e-15);
        assert!(b.ux.max_abs_diff(&GridFn2D::from_fn(g.clone(), |_, y| y)) < 1e-15);
        assert!(b.uxy.values().iter().all(|&v| v == 1.0));
        assert_eq!(b.uxx.sup_norm(), 0.0);
    }

    #[test]
    fn biquadratic_from_constant_b22() {
        let g = grid(Domain::unit(), 21);
        // traces of x^2 y^2: u_yy(1, y) = 2, u_xx(x, 1) = 2, the rest vanish
        let z = NonclassicalData {
            z02_h1: Field1D::constant(2.0),
            z20_h2: Field1D::constant(2.0),
            ..NonclassicalData::zero()
        };
        let b22 = GridFn2D::from_fn(g.clone(), |_, _| 4.0);
        let h = reconstruct_lower(&z, &b22);
        let b = assemble_solution(&z, &h);
        let exact = GridFn2D::from_fn(g.clone(), |x, y| x * x * y * y);
        assert!(b.u.max_abs_diff(&exact) < 5e-3);
        assert_eq!(b.uxxyy.values(), b22.values());
        let uxxy = GridFn2D::from_fn(g.clone(), |_, y| 4.0 * y);
        assert!(b.uxxy.max_abs_diff(&uxxy) < 1e-12);
    }

    #[test]
    fn lower_unknowns_examples() {
        let g = grid(Domain::unit(), 9);
        let b22 = GridFn2D::zeros(g.clone());
        let z = NonclassicalData {
            z20: Field1D::analytic(|x| x.sin()),
            z20_h2: Field1D::analytic(|x| x.sin()),
            ..NonclassicalData::zero()
        };
        assert_eq!(reconstruct_lower(&z, &b22).b21.sup_norm(), 0.0);
        let z = NonclassicalData {
            z01_h1: 1.0,
            ..NonclassicalData::zero()
        };
        assert_eq!(reconstruct_lower(&z, &b22).b11, 1.0);
    }

    #[test]
    fn bilinear_traces_give_unit_b11() {
        let d = Domain::new(2.0, 0.5).unwrap();
        let g = grid(d, 11);
        // traces of u = xy
        let z = NonclassicalData {
            z01_h1: 2.0,
            z10_h2: 0.5,
            ..NonclassicalData::zero()
        };
        let h = reconstruct_lower(&z, &GridFn2D::zeros(g));
        assert!((h.b11 - 1.0).abs() < 1e-15);
        assert_eq!(h.b21.sup_norm(), 0.0);
        assert_eq!(h.b12.sup_norm(), 0.0);
        assert!((b11_alternative(&z, &h) - h.b11).abs() < 1e-12);
    }
}
