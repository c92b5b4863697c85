use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The rectangle `[0, h1] x [0, h2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    h1: f64,
    h2: f64,
}

impl Domain {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        if !(h1.is_finite() && h1 > 0.0 && h2.is_finite() && h2 > 0.0) {
            return Err(Error::invalid(format!(
                "domain lengths must be positive and finite, got h1 = {h1}, h2 = {h2}"
            )));
        }
        Ok(Self { h1, h2 })
    }

    pub fn unit() -> Self {
        Self { h1: 1.0, h2: 1.0 }
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }
}

/// Node set and composite trapezoid weights on `[0, length]`.
///
/// Besides the full-interval weights, the axis provides the running
/// integrals `int_0^{x_i} f` and first moments `int_0^{x_i} (x_i - s) f(s) ds`
/// evaluated with the trapezoid rule restricted to the nodes `<= x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Axis {
    /// `n` uniform nodes on `[0, length]` merged with the given interior
    /// breakpoints.
    pub fn uniform(length: f64, n: usize, breakpoints: &[f64]) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!(
                "node count must be at least 3, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!(
                "axis length must be positive, got {length}"
            )));
        }
        for &b in breakpoints {
            if !(b > 0.0 && b < length) {
                return Err(Error::invalid(format!(
                    "breakpoint {b} lies outside the open interval (0, {length})"
                )));
            }
        }
        let step = length / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
        nodes[n - 1] = length;
        let snap = 1e-12 * length;
        for &b in breakpoints {
            if nodes.iter().all(|&t| (t - b).abs() > snap) {
                nodes.push(b);
            }
        }
        nodes.sort_by(f64::total_cmp);
        Self::from_nodes(nodes)
    }

    /// Builds an axis over arbitrary strictly increasing nodes starting at 0.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("an axis needs at least two nodes"));
        }
        if nodes[0] != 0.0 {
            return Err(Error::invalid(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("axis nodes must be strictly increasing"));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for k in 0..n - 1 {
            let half = 0.5 * (nodes[k + 1] - nodes[k]);
            weights[k] += half;
            weights[k + 1] += half;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Largest panel width.
    pub fn max_step(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let snap = 1e-12 * self.length();
        let i = self.nodes.partition_point(|&s| s < t - snap);
        (i < self.nodes.len() && (self.nodes[i] - t).abs() <= snap).then_some(i)
    }

    /// The same axis with every panel bisected.
    pub fn refined(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.length());
        Self::from_nodes(nodes).expect("bisection keeps nodes increasing")
    }

    /// Trapezoid weight of node `k` in the rule over `[0, x_i]`.
    pub fn partial_weight(&self, i: usize, k: usize) -> f64 {
        if i == 0 || k > i {
            return 0.0;
        }
        let x = &self.nodes;
        if k == 0 {
            0.5 * (x[1] - x[0])
        } else if k == i {
            0.5 * (x[i] - x[i - 1])
        } else {
            0.5 * (x[k + 1] - x[k - 1])
        }
    }

    /// Weights `w_k (L - x_k)` of the full first moment `int_0^L (L - s) f(s) ds`.
    pub fn full_moment_weights(&self) -> Vec<f64> {
        let length = self.length();
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * (length - t))
            .collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Running integrals `int_0^{x_i} f`.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.len());
        let mut out = vec![0.0; f.len()];
        for i in 1..f.len() {
            let dx = self.nodes[i] - self.nodes[i - 1];
            out[i] = out[i - 1] + 0.5 * dx * (f[i - 1] + f[i]);
        }
        out
    }

    /// Running first moments `int_0^{x_i} (x_i - s) f(s) ds`.
    ///
    /// Uses `M_i = M_{i-1} + dx C_{i-1} + dx^2 f_{i-1} / 2`, which is an exact
    /// identity for the trapezoid rule applied to the product `(x_i - s) f(s)`.
    pub fn moments(&self, f: &[f64]) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.len());
        let mut out = vec![0.0; f.len()];
        let mut cum = 0.0;
        for i in 1..f.len() {
            let dx = self.nodes[i] - self.nodes[i - 1];
            out[i] = out[i - 1] + dx * cum + 0.5 * dx * dx * f[i - 1];
            cum += 0.5 * dx * (f[i - 1] + f[i]);
        }
        out
    }

    /// Full first moment `int_0^L (L - s) f(s) ds`.
    pub fn full_moment(&self, f: &[f64]) -> f64 {
        self.full_moment_weights()
            .iter()
            .zip(f)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// Tensor-product grid over the closed rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    domain: Domain,
    x: Arc<Axis>,
    y: Arc<Axis>,
}

impl Grid2D {
    pub fn new(domain: Domain, x: Axis, y: Axis) -> Result<Self> {
        let tol = 1e-12;
        if (x.length() - domain.h1()).abs() > tol * domain.h1()
            || (y.length() - domain.h2()).abs() > tol * domain.h2()
        {
            return Err(Error::shape("axis lengths do not match the domain"));
        }
        Ok(Self {
            domain,
            x: Arc::new(x),
            y: Arc::new(y),
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn x(&self) -> &Arc<Axis> {
        &self.x
    }

    pub fn y(&self) -> &Arc<Axis> {
        &self.y
    }

    pub fn n1(&self) -> usize {
        self.x.len()
    }

    pub fn n2(&self) -> usize {
        self.y.len()
    }

    pub fn len(&self) -> usize {
        self.n1() * self.n2()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of node `(i, j)`; rows run along x with y outermost.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n1() + i
    }

    pub fn refined(&self) -> Self {
        Self {
            domain: self.domain,
            x: Arc::new(self.x.refined()),
            y: Arc::new(self.y.refined()),
        }
    }
}

/// Uniform `n1 x n2` grid with optional interior breakpoints inserted so that
/// discontinuity lines of piecewise coefficients fall on nodes.
pub fn build_grid(
    domain: Domain,
    n1: usize,
    n2: usize,
    x_breakpoints: &[f64],
    y_breakpoints: &[f64],
) -> Result<Grid2D> {
    let x = Axis::uniform(domain.h1(), n1, x_breakpoints)?;
    let y = Axis::uniform(domain.h2(), n2, y_breakpoints)?;
    Grid2D::new(domain, x, y)
}
