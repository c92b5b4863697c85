//! Grids, evaluable fields, trapezoid quadrature with first-moment kernels,
//! and the discrete `L_p`, `W_p^(2,2)` and `E_p^(2,2)` norms.

mod field;
mod grid;
mod gridfn;
mod norm;
pub mod stencil;

pub use field::{Field1D, Field2D, Rect, SmoothnessTag};
pub use grid::{build_grid, Axis, Domain, Grid2D};
pub use gridfn::{
    axis_apply, moment_integral_1d, quad_1d, tensor_apply, AxisOp, GridFn1D, GridFn2D,
};
pub use norm::{ep22_norm, lp_norm, wp22_norm, LpNorm, NormSpec};
