use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exact::{ExactSolution, Profile, Separable};
use crate::error::{Error, Result};
use crate::fields::{build_grid, Domain, Field1D, Field2D, Grid2D, Rect, SmoothnessTag};
use crate::problem::{ClassicalData, Coefficients, NonclassicalData, PdeProblem};

/// A problem built backwards from a known solution.
#[derive(Clone)]
pub struct MmsCase {
    pub name: String,
    pub u_star: Arc<dyn ExactSolution>,
    pub coeffs: Coefficients,
    pub problem: PdeProblem,
}

impl std::fmt::Debug for MmsCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MmsCase")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

impl MmsCase {
    /// An `n x n` grid with the coefficient discontinuities on nodes.
    pub fn grid(&self, n: usize) -> Result<Arc<Grid2D>> {
        let d = self.problem.domain;
        let (xb, yb) = self.coeffs.breakpoints(d);
        Ok(Arc::new(build_grid(d, n, n, &xb, &yb)?))
    }

    /// Classical traces of `u*` with exact derivative evaluators.
    pub fn classical_traces(&self) -> ClassicalData {
        classical_traces(self.u_star.clone(), self.problem.domain)
    }
}

fn trace(u: &Arc<dyn ExactSolution>, along_x: bool, fixed: f64, order_fixed: usize) -> Field1D {
    let at = move |u: Arc<dyn ExactSolution>, k: usize| {
        move |t: f64| {
            if along_x {
                u.derivative(k, order_fixed, t, fixed)
            } else {
                u.derivative(order_fixed, k, fixed, t)
            }
        }
    };
    Field1D::analytic_with_derivatives(at(u.clone(), 0), at(u.clone(), 1), at(u.clone(), 2))
}

pub fn classical_traces(u: Arc<dyn ExactSolution>, domain: Domain) -> ClassicalData {
    ClassicalData {
        phi1: trace(&u, false, 0.0, 0),
        phi2: trace(&u, false, domain.h1(), 0),
        psi1: trace(&u, true, 0.0, 0),
        psi2: trace(&u, true, domain.h2(), 0),
    }
}

/// Nonclassical traces of `u*`.
pub fn nonclassical_traces(u: &Arc<dyn ExactSolution>, domain: Domain) -> NonclassicalData {
    let (h1, h2) = (domain.h1(), domain.h2());
    let edge = |p: usize, q: usize, along_x: bool, fixed: f64| {
        let u = u.clone();
        Field1D::analytic(move |t| {
            if along_x {
                u.derivative(p, q, t, fixed)
            } else {
                u.derivative(p, q, fixed, t)
            }
        })
    };
    NonclassicalData {
        z00: u.derivative(0, 0, 0.0, 0.0),
        z10: u.derivative(1, 0, 0.0, 0.0),
        z01: u.derivative(0, 1, 0.0, 0.0),
        z20: edge(2, 0, true, 0.0),
        z02: edge(0, 2, false, 0.0),
        z00_h1: u.derivative(0, 0, h1, 0.0),
        z01_h1: u.derivative(0, 1, h1, 0.0),
        z02_h1: edge(0, 2, false, h1),
        z00_h2: u.derivative(0, 0, 0.0, h2),
        z10_h2: u.derivative(1, 0, 0.0, h2),
        z20_h2: edge(2, 0, true, h2),
    }
}

/// `Z22 = V22 u*` and all boundary data from the traces of `u*`.
pub fn make_mms(
    name: &str,
    u_star: Arc<dyn ExactSolution>,
    coeffs: Coefficients,
    domain: Domain,
) -> MmsCase {
    let c = coeffs.clone();
    let u = u_star.clone();
    let z22 = Field2D::analytic(move |x, y| {
        let a = c.at(x, y);
        let d = |p, q| u.derivative(p, q, x, y);
        d(2, 2)
            + a.a21 * d(2, 1)
            + a.a12 * d(1, 2)
            + a.a20 * d(2, 0)
            + a.a02 * d(0, 2)
            + a.a11 * d(1, 1)
            + a.a10 * d(1, 0)
            + a.a01 * d(0, 1)
            + a.a00 * d(0, 0)
    })
    .with_tag(SmoothnessTag::Bounded);
    let data = nonclassical_traces(&u_star, domain);
    MmsCase {
        name: name.to_string(),
        u_star,
        coeffs: coeffs.clone(),
        problem: PdeProblem {
            domain,
            coeffs,
            z22,
            data,
        },
    }
}

fn only_a00(c: Field2D) -> Coefficients {
    Coefficients {
        a00: c,
        ..Coefficients::zero()
    }
}

/// Smooth variable coefficients of moderate size.
pub fn smooth_coefficients(seed: u64, scale: f64) -> Coefficients {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = || {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let (kx, ky): (f64, f64) = (rng.gen_range(0.5..2.5), rng.gen_range(0.5..2.5));
        Field2D::analytic(move |x, y| scale * (a + b * (kx * x - ky * y).cos()))
    };
    Coefficients {
        a21: f(),
        a12: f(),
        a20: f(),
        a02: f(),
        a11: f(),
        a10: f(),
        a01: f(),
        a00: f(),
    }
}

/// `a00 = low` for `x < at`, `high` for `x >= at`.
pub fn step_a00(domain: Domain, at: f64, low: f64, high: f64) -> Result<Coefficients> {
    let (h1, h2) = (domain.h1(), domain.h2());
    let a00 = Field2D::piecewise(
        domain,
        vec![
            (Rect::new(0.0, at, 0.0, h2), Field2D::constant(low)),
            (Rect::new(at, h1, 0.0, h2), Field2D::constant(high)),
        ],
    )?;
    Ok(only_a00(a00))
}

pub const CASE_NAMES: [&str; 6] = [
    "bilinear",
    "biquadratic",
    "biquadratic-zero",
    "trigonometric",
    "smooth-variable",
    "piecewise-a00",
];

/// The fixed library of manufactured cases on the unit square.
///
/// * `bilinear`: `1 + x - 2y + 3xy` with smooth variable coefficients
/// * `biquadratic`: `x^2 y^2`, `a00 = 1`
/// * `biquadratic-zero`: `x^2 y^2`, all coefficients zero
/// * `trigonometric`: `sin x sin y`, `a00 = 1`
/// * `smooth-variable`: `exp(x/2) cos y + x^2 y` with smooth variable coefficients
/// * `piecewise-a00`: `sin x sin y + x y^2`, `a00` jumping from 1 to 3 at `x = 0.5`
pub fn named_case(name: &str) -> Result<MmsCase> {
    let d = Domain::unit();
    let poly = |c: &[f64]| Profile::Poly(c.to_vec());
    let sin = Profile::Sin {
        freq: 1.0,
        phase: 0.0,
    };
    let (u, coeffs): (Separable, Coefficients) = match name {
        "bilinear" => (
            Separable::new(vec![
                (1.0, poly(&[1.0, 1.0]), poly(&[1.0])),
                (1.0, poly(&[1.0]), poly(&[0.0, -2.0])),
                (3.0, poly(&[0.0, 1.0]), poly(&[0.0, 1.0])),
            ]),
            smooth_coefficients(17, 0.5),
        ),
        "biquadratic" => (
            Separable::single(poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])),
            only_a00(Field2D::constant(1.0)),
        ),
        "biquadratic-zero" => (
            Separable::single(poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])),
            Coefficients::zero(),
        ),
        "trigonometric" => (
            Separable::single(sin.clone(), sin),
            only_a00(Field2D::constant(1.0)),
        ),
        "smooth-variable" => (
            Separable::new(vec![
                (
                    1.0,
                    Profile::Exp { rate: 0.5 },
                    Profile::Sin {
                        freq: 1.0,
                        phase: std::f64::consts::FRAC_PI_2,
                    },
                ),
                (1.0, poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 1.0])),
            ]),
            smooth_coefficients(29, 0.4),
        ),
        "piecewise-a00" => (
            Separable::new(vec![
                (1.0, sin.clone(), sin),
                (1.0, poly(&[0.0, 1.0]), poly(&[0.0, 0.0, 1.0])),
            ]),
            step_a00(d, 0.5, 1.0, 3.0)?,
        ),
        _ => {
            return Err(Error::invalid(format!(
                "unknown case {name:?}; available: {}",
                CASE_NAMES.join(", ")
            )))
        }
    };
    Ok(make_mms(name, Arc::new(u), coeffs, d))
}

/// Random trigonometric polynomial of degree 3 on `[0, length]`.
fn trig_poly(rng: &mut ChaCha8Rng, length: f64, amplitude: f64) -> Field1D {
    let a: Vec<f64> = (0..4)
        .map(|_| amplitude * rng.gen_range(-1.0..1.0))
        .collect();
    let b: Vec<f64> = (0..4)
        .map(|_| amplitude * rng.gen_range(-1.0..1.0))
        .collect();
    let w = std::f64::consts::PI / length;
    Field1D::analytic(move |t| {
        (0..4)
            .map(|k| {
                let arg = w * k as f64 * t;
                a[k] * arg.cos() + b[k] * arg.sin()
            })
            .sum()
    })
}

/// Random nonclassical data; with `admissible` the three corner relations
/// are enforced by adjusting `z00_h1`, `z00_h2` and `z10_h2`.
pub fn random_data(rng: &mut ChaCha8Rng, domain: Domain, admissible: bool) -> NonclassicalData {
    let (h1, h2) = (domain.h1(), domain.h2());
    let mut s = || rng.gen_range(-1.0..1.0);
    let (z00, z10, z01, z00_h1, z01_h1, z00_h2, z10_h2) = (s(), s(), s(), s(), s(), s(), s());
    let mut z = NonclassicalData {
        z00,
        z10,
        z01,
        z20: trig_poly(rng, h1, 1.0),
        z02: trig_poly(rng, h2, 1.0),
        z00_h1,
        z01_h1,
        z02_h1: trig_poly(rng, h2, 1.0),
        z00_h2,
        z10_h2,
        z20_h2: trig_poly(rng, h1, 1.0),
    };
    if admissible {
        z.complete_admissible(domain);
    }
    z
}

/// Random smooth right-hand side.
pub fn random_rhs(rng: &mut ChaCha8Rng) -> Field2D {
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Field2D::analytic(move |x, y| {
        c[0] + c[1] * x
            + c[2] * y
            + c[3] * (2.0 * x + y).sin()
            + c[4] * (x * y).cos()
            + c[5] * (x - y).exp()
    })
}

/// A random admissible problem with the given coefficients.
pub fn random_problem(seed: u64, coeffs: &Coefficients, domain: Domain) -> PdeProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PdeProblem {
        domain,
        coeffs: coeffs.clone(),
        z22: random_rhs(&mut rng),
        data: random_data(&mut rng, domain, true),
    }
}
