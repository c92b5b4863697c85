//! Solver for the generalized Mangeron equation
//!
//! ```text
//! u_xxyy + a21 u_xxy + a12 u_xyy + a20 u_xx + a02 u_yy + a11 u_xy
//!        + a10 u_x + a01 u_y + a00 u = Z22      on [0, h1] x [0, h2]
//! ```
//!
//! with boundary data given by corner values, corner derivatives and
//! second-derivative traces along the edges. The problem is reduced to an
//! integral equation for `u_xxyy`, discretized with the trapezoid rule at the
//! grid nodes, and solved by successive approximations or a dense LU solve.

pub mod error;
pub mod expr;
pub mod fields;
pub mod mms;
pub mod problem;
pub mod reduction;
pub mod solver;

pub use error::{Error, Result};
