use serde::Serialize;

use crate::fields::GridFn2D;
use crate::reduction::DiscreteOperator;

/// Consecutive growing updates after which the iteration is abandoned.
pub const GROWTH_LIMIT: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub final_update_norm: f64,
    /// Sup norm of every update, in order.
    pub update_norms: Vec<f64>,
    /// Ratio of the last two update norms.
    pub final_ratio: Option<f64>,
    pub converged: bool,
    pub diverged: bool,
}

/// Successive approximations `b <- g - K b` starting from `b = g`.
///
/// Stops once the sup norm of the update is at most `tol`. Divergence is
/// declared after [`GROWTH_LIMIT`] consecutive growing updates, a non-finite
/// update, or `max_iter` iterations; the last iterate is returned either way.
pub fn solve_neumann(
    op: &DiscreteOperator,
    tol: f64,
    max_iter: usize,
) -> (GridFn2D, IterationReport) {
    let g = op.rhs();
    let mut b = g.clone();
    let mut norms: Vec<f64> = Vec::new();
    let mut growth = 0;
    let mut converged = false;
    let mut diverged = false;
    for _ in 0..max_iter {
        // g - K b = g - (I + K) b + b
        let applied = op.apply(&b);
        let mut update = 0.0f64;
        let mut next = b.clone();
        for ((n, &a), (&gv, &bv)) in next
            .values_mut()
            .iter_mut()
            .zip(applied.values())
            .zip(g.values().iter().zip(b.values()))
        {
            *n = gv - a + bv;
            update = update.max((*n - bv).abs());
        }
        if update.is_nan() || !update.is_finite() {
            norms.push(update);
            diverged = true;
            break;
        }
        if norms.last().is_some_and(|&prev| update > prev) {
            growth += 1;
        } else {
            growth = 0;
        }
        norms.push(update);
        b = next;
        if update <= tol {
            converged = true;
            break;
        }
        if growth >= GROWTH_LIMIT {
            diverged = true;
            break;
        }
    }
    if !converged {
        diverged = true;
    }
    let final_ratio = match norms.as_slice() {
        [.., a, b] if *a > 0.0 => Some(b / a),
        _ => None,
    };
    let report = IterationReport {
        iterations: norms.len(),
        final_update_norm: norms.last().copied().unwrap_or(0.0),
        update_norms: norms,
        final_ratio,
        converged,
        diverged,
    };
    (b, report)
}
