use std::sync::Arc;

use crate::error::Result;
use crate::expr::Expr;

/// A function on the rectangle with analytic partial derivatives
/// `D_x^p D_y^q`, `p, q <= 2`.
pub trait ExactSolution: Send + Sync {
    fn derivative(&self, p: usize, q: usize, x: f64, y: f64) -> f64;

    fn value(&self, x: f64, y: f64) -> f64 {
        self.derivative(0, 0, x, y)
    }
}

/// A function of one variable with derivatives up to order 2.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `sum c_k t^k`
    Poly(Vec<f64>),
    /// `sin(freq t + phase)`
    Sin { freq: f64, phase: f64 },
    /// `exp(rate t)`
    Exp { rate: f64 },
}

impl Profile {
    pub fn derivative(&self, order: usize, t: f64) -> f64 {
        match self {
            Profile::Poly(c) => {
                let mut acc = 0.0;
                for k in (order..c.len()).rev() {
                    let falling: f64 = (0..order).map(|m| (k - m) as f64).product();
                    acc = acc * t + c[k] * falling;
                }
                acc
            }
            Profile::Sin { freq, phase } => {
                let arg = freq * t + phase;
                let s = freq.powi(order as i32);
                match order % 4 {
                    0 => s * arg.sin(),
                    1 => s * arg.cos(),
                    2 => -s * arg.sin(),
                    _ => -s * arg.cos(),
                }
            }
            Profile::Exp { rate } => rate.powi(order as i32) * (rate * t).exp(),
        }
    }
}

/// `sum_k c_k f_k(x) g_k(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separable {
    pub terms: Vec<(f64, Profile, Profile)>,
}

impl Separable {
    pub fn new(terms: Vec<(f64, Profile, Profile)>) -> Self {
        Self { terms }
    }

    pub fn single(f: Profile, g: Profile) -> Self {
        Self {
            terms: vec![(1.0, f, g)],
        }
    }
}

impl ExactSolution for Separable {
    fn derivative(&self, p: usize, q: usize, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, f, g)| c * f.derivative(p, x) * g.derivative(q, y))
            .sum()
    }
}

/// An expression with its nine partial derivatives precomputed.
#[derive(Debug, Clone)]
pub struct SymbolicSolution {
    parts: Arc<[[Expr; 3]; 3]>,
}

impl SymbolicSolution {
    pub fn new(e: &Expr) -> Result<Self> {
        let mut rows: Vec<[Expr; 3]> = Vec::with_capacity(3);
        for p in 0..3 {
            rows.push([e.partial(p, 0)?, e.partial(p, 1)?, e.partial(p, 2)?]);
        }
        let parts: [[Expr; 3]; 3] = rows.try_into().expect("three rows");
        Ok(Self {
            parts: Arc::new(parts),
        })
    }
}

impl ExactSolution for SymbolicSolution {
    fn derivative(&self, p: usize, q: usize, x: f64, y: f64) -> f64 {
        self.parts[p][q].eval(x, y)
    }
}
