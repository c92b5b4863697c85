//! Reduction of the boundary-value problem to integral equations for the
//! unknown quadruple `(b11, b21, b12, b22)`.

mod b0;
pub mod kernels;
mod operator;

pub use b0::{assemble_b0, B0Bundle};
pub use kernels::KernelSet;
pub use operator::{
    apply_v22, assemble_coupled, assemble_eliminated, compute_rtilde, CoupledSystem,
    DiscreteOperator, Representation, DENSE_NODE_LIMIT,
};
