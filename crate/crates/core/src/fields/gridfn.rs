use std::sync::Arc;

use super::grid::{Axis, Grid2D};
use crate::error::{Error, Result};

/// Values of a function at the nodes of one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn1D {
    axis: Arc<Axis>,
    values: Vec<f64>,
}

impl GridFn1D {
    pub fn new(axis: Arc<Axis>, values: Vec<f64>) -> Result<Self> {
        if values.len() != axis.len() {
            return Err(Error::shape(format!(
                "{} values for an axis of {} nodes",
                values.len(),
                axis.len()
            )));
        }
        Ok(Self { axis, values })
    }

    pub fn zeros(axis: Arc<Axis>) -> Self {
        let n = axis.len();
        Self {
            axis,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(axis: Arc<Axis>, f: impl Fn(f64) -> f64) -> Self {
        let values = axis.nodes().iter().map(|&t| f(t)).collect();
        Self { axis, values }
    }

    pub fn axis(&self) -> &Arc<Axis> {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sum_i w_i f_i` with composite trapezoid weights.
pub fn quad_1d(f: &GridFn1D) -> f64 {
    f.axis.integrate(&f.values)
}

/// `int_0^x (x - a) f(a) da` by the trapezoid rule over the nodes `<= x`.
/// `x` must be a node; no interpolation is applied.
pub fn moment_integral_1d(f: &GridFn1D, x: f64) -> Result<f64> {
    let i = f.axis.index_of(x).ok_or(Error::NotANode { value: x })?;
    let xi = f.axis.nodes()[i];
    Ok((0..=i)
        .map(|k| f.axis.partial_weight(i, k) * (xi - f.axis.nodes()[k]) * f.values[k])
        .sum())
}

/// Values of a function at the nodes of a tensor grid, y outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn2D {
    grid: Arc<Grid2D>,
    values: Vec<f64>,
}

impl GridFn2D {
    pub fn new(grid: Arc<Grid2D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::shape(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid2D>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: Arc<Grid2D>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &y in grid.y().nodes() {
            for &x in grid.x().nodes() {
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    /// Value `g(x_i, y_j)` built from node indices.
    pub fn from_index_fn(grid: Arc<Grid2D>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.n2() {
            for i in 0..grid.n1() {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid2D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &GridFn2D) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn max_abs_diff(&self, other: &GridFn2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFn2D, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Values along x at fixed `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        let n1 = self.grid.n1();
        &self.values[j * n1..(j + 1) * n1]
    }

    /// Values along y at fixed `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        (0..self.grid.n2()).map(|j| self.at(i, j)).collect()
    }
}

/// Which 1D rule to apply along an axis of a tensor grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisOp {
    Identity,
    /// `int_0^t f`
    Cumulative,
    /// `int_0^t (t - s) f(s) ds`
    Moment,
}

fn apply_axis_op(axis: &Axis, op: AxisOp, f: &[f64]) -> Vec<f64> {
    match op {
        AxisOp::Identity => f.to_vec(),
        AxisOp::Cumulative => axis.cumulative(f),
        AxisOp::Moment => axis.moments(f),
    }
}

/// Tensor-product application of one rule along x and another along y.
pub fn tensor_apply(f: &GridFn2D, along_x: AxisOp, along_y: AxisOp) -> GridFn2D {
    let grid = f.grid.clone();
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut stage = vec![0.0; n1 * n2];
    for j in 0..n2 {
        let row = apply_axis_op(grid.x(), along_x, f.row(j));
        stage[j * n1..(j + 1) * n1].copy_from_slice(&row);
    }
    if along_y != AxisOp::Identity {
        let mut col = vec![0.0; n2];
        for i in 0..n1 {
            for j in 0..n2 {
                col[j] = stage[j * n1 + i];
            }
            let out = apply_axis_op(grid.y(), along_y, &col);
            for j in 0..n2 {
                stage[j * n1 + i] = out[j];
            }
        }
    }
    GridFn2D {
        grid,
        values: stage,
    }
}

/// Running rule along one axis of a 1D grid function.
pub fn axis_apply(f: &GridFn1D, op: AxisOp) -> GridFn1D {
    GridFn1D {
        axis: f.axis.clone(),
        values: apply_axis_op(&f.axis, op, &f.values),
    }
}
