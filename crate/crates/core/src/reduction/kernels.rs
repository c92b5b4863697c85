//! Grouped kernels of the reduced equation for `b22`.
//!
//! `alpha` and `beta` are the integration variables along x and y.

use crate::fields::Field2D;
use crate::problem::{CoeffValues, Coefficients};

/// Multiplies `b21(alpha)`.
#[inline]
pub fn ka(c: &CoeffValues, x: f64, y: f64, alpha: f64) -> f64 {
    (x - alpha) * (y * c.a00 + c.a01) + y * c.a10 + c.a11
}

/// Multiplies `b22(alpha, y)`.
#[inline]
pub fn kb(c: &CoeffValues, x: f64, alpha: f64) -> f64 {
    (x - alpha) * c.a02 + c.a12
}

/// Multiplies `b12(beta)`.
#[inline]
pub fn kc(c: &CoeffValues, x: f64, y: f64, beta: f64) -> f64 {
    (y - beta) * (x * c.a00 + c.a10) + x * c.a01 + c.a11
}

/// Multiplies `b22(x, beta)`.
#[inline]
pub fn kd(c: &CoeffValues, y: f64, beta: f64) -> f64 {
    (y - beta) * c.a20 + c.a21
}

/// Multiplies `b22(alpha, beta)`.
#[inline]
pub fn ke(c: &CoeffValues, x: f64, y: f64, alpha: f64, beta: f64) -> f64 {
    let (dx, dy) = (x - alpha, y - beta);
    dx * dy * c.a00 + dy * c.a10 + dx * c.a01 + c.a11
}

/// Multiplies `b11`.
#[inline]
pub fn p(c: &CoeffValues, x: f64, y: f64) -> f64 {
    x * y * c.a00 + y * c.a10 + x * c.a01 + c.a11
}

/// Multiplies `b21(x)`.
#[inline]
pub fn q(c: &CoeffValues, y: f64) -> f64 {
    y * c.a20 + c.a21
}

/// Multiplies `b12(y)`.
#[inline]
pub fn s(c: &CoeffValues, x: f64) -> f64 {
    x * c.a02 + c.a12
}

/// Kernels bound to a coefficient set, evaluated at arbitrary points.
#[derive(Debug, Clone)]
pub struct KernelSet {
    coeffs: Coefficients,
}

impl KernelSet {
    pub fn new(coeffs: &Coefficients) -> Self {
        Self {
            coeffs: coeffs.clone(),
        }
    }

    pub fn ka(&self, x: f64, y: f64, alpha: f64) -> f64 {
        ka(&self.coeffs.at(x, y), x, y, alpha)
    }

    pub fn kb(&self, x: f64, y: f64, alpha: f64) -> f64 {
        kb(&self.coeffs.at(x, y), x, alpha)
    }

    pub fn kc(&self, x: f64, y: f64, beta: f64) -> f64 {
        kc(&self.coeffs.at(x, y), x, y, beta)
    }

    pub fn kd(&self, x: f64, y: f64, beta: f64) -> f64 {
        kd(&self.coeffs.at(x, y), y, beta)
    }

    pub fn ke(&self, x: f64, y: f64, alpha: f64, beta: f64) -> f64 {
        ke(&self.coeffs.at(x, y), x, y, alpha, beta)
    }

    pub fn p(&self) -> Field2D {
        let c = self.coeffs.clone();
        Field2D::analytic(move |x, y| p(&c.at(x, y), x, y))
    }

    pub fn q(&self) -> Field2D {
        let c = self.coeffs.clone();
        Field2D::analytic(move |x, y| q(&c.at(x, y), y))
    }

    pub fn s(&self) -> Field2D {
        let c = self.coeffs.clone();
        Field2D::analytic(move |x, y| s(&c.at(x, y), x))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn coeffs() -> Coefficients {
        Coefficients {
            a21: Field2D::analytic(|x, y| 1.0 + x * y),
            a12: Field2D::analytic(|x, _| x.sin()),
            a20: Field2D::analytic(|_, y| y.cos()),
            a02: Field2D::constant(-0.7),
            a11: Field2D::analytic(|x, y| x - y),
            a10: Field2D::analytic(|x, y| (x + y).exp()),
            a01: Field2D::constant(0.3),
            a00: Field2D::analytic(|x, y| x * x + y),
        }
    }

    proptest! {
        #[test]
        fn kernels_match_definitions(
            x in 0.0..1.0f64, y in 0.0..1.0f64, a in 0.0..1.0f64, b in 0.0..1.0f64
        ) {
            let c = coeffs();
            let k = KernelSet::new(&c);
            let v = |f: &Field2D| f.eval(x, y);
            let (a00, a01, a10, a11) = (v(&c.a00), v(&c.a01), v(&c.a10), v(&c.a11));
            let close = |u: f64, w: f64| (u - w).abs() <= 1e-12 * (1.0 + w.abs());
            prop_assert!(close(k.ka(x, y, a), (x - a) * (y * a00 + a01) + y * a10 + a11));
            prop_assert!(close(k.kb(x, y, a), (x - a) * v(&c.a02) + v(&c.a12)));
            prop_assert!(close(k.kc(x, y, b), (y - b) * (x * a00 + a10) + x * a01 + a11));
            prop_assert!(close(k.kd(x, y, b), (y - b) * v(&c.a20) + v(&c.a21)));
            prop_assert!(close(
                k.ke(x, y, a, b),
                (x - a) * (y - b) * a00 + (y - b) * a10 + (x - a) * a01 + a11
            ));
            prop_assert!(close(k.p().eval(x, y), x * y * a00 + y * a10 + x * a01 + a11));
            prop_assert!(close(k.q().eval(x, y), y * v(&c.a20) + v(&c.a21)));
            prop_assert!(close(k.s().eval(x, y), x * v(&c.a02) + v(&c.a12)));
            // diagonal limits
            prop_assert!(close(k.ke(x, y, x, y), a11));
            prop_assert!(close(k.ka(x, y, x), y * a10 + a11));
        }
    }
}
