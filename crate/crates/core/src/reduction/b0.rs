use std::sync::Arc;

use crate::fields::{Grid2D, GridFn2D};
use crate::problem::NonclassicalData;

/// The base function built from the nonclassical data alone, with its
/// nonvanishing derivatives. Mixed derivatives of `B0` are identically zero.
#[derive(Debug, Clone)]
pub struct B0Bundle {
    pub b0: GridFn2D,
    pub b0_x: GridFn2D,
    pub b0_y: GridFn2D,
    pub b0_xx: GridFn2D,
    pub b0_yy: GridFn2D,
}

/// `B0 = Z00 + x Z10 + y Z01 + int_0^x (x - a) Z20 + int_0^y (y - b) Z02`.
pub fn assemble_b0(z: &NonclassicalData, grid: &Arc<Grid2D>) -> B0Bundle {
    let (ax, ay) = (grid.x(), grid.y());
    let z20 = z.z20.sample(ax);
    let z02 = z.z02.sample(ay);
    let m20 = ax.moments(&z20);
    let c20 = ax.cumulative(&z20);
    let m02 = ay.moments(&z02);
    let c02 = ay.cumulative(&z02);
    let xs = ax.nodes();
    let ys = ay.nodes();
    let make = |f: &dyn Fn(usize, usize) -> f64| GridFn2D::from_index_fn(grid.clone(), f);
    B0Bundle {
        b0: make(&|i, j| z.z00 + xs[i] * z.z10 + ys[j] * z.z01 + m20[i] + m02[j]),
        b0_x: make(&|i, _| z.z10 + c20[i]),
        b0_y: make(&|_, j| z.z01 + c02[j]),
        b0_xx: make(&|i, _| z20[i]),
        b0_yy: make(&|_, j| z02[j]),
    }
}
