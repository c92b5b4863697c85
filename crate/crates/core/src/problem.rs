//! Problem data: coefficients, right-hand side, boundary data in classical
//! and nonclassical form, the conversions between them and the compatibility
//! checks on corner values.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::stencil::differentiate;
use crate::fields::{Axis, Domain, Field1D, Field2D, Grid2D, SmoothnessTag};

/// Tolerance on `|phi1(0) - psi1(0)|` for analytic classical data.
pub const CORNER_TOL_ANALYTIC: f64 = 1e-10;
/// Tolerance on `|phi1(0) - psi1(0)|` for grid-sampled classical data.
pub const CORNER_TOL_SAMPLED: f64 = 1e-6;
/// Relative tolerance of the admissibility constraints on nonclassical data.
pub const CONSTRAINT_REL_TOL: f64 = 1e-8;

/// The eight coefficients `a_ij`, `(i, j) != (2, 2)`.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub a21: Field2D,
    pub a12: Field2D,
    pub a20: Field2D,
    pub a02: Field2D,
    pub a11: Field2D,
    pub a10: Field2D,
    pub a01: Field2D,
    pub a00: Field2D,
}

/// The eight coefficient values at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CoeffValues {
    pub a21: f64,
    pub a12: f64,
    pub a20: f64,
    pub a02: f64,
    pub a11: f64,
    pub a10: f64,
    pub a01: f64,
    pub a00: f64,
}

impl Coefficients {
    /// Validates that every coefficient's tag meets the class its slot needs:
    /// `a_2j` bounded in x, `a_i2` bounded in y, the rest `L_p`.
    pub fn new(
        a21: Field2D,
        a12: Field2D,
        a20: Field2D,
        a02: Field2D,
        a11: Field2D,
        a10: Field2D,
        a01: Field2D,
        a00: Field2D,
    ) -> Result<Self> {
        let c = Self {
            a21,
            a12,
            a20,
            a02,
            a11,
            a10,
            a01,
            a00,
        };
        for (name, field) in c.named() {
            let need = Self::required_class(name);
            if !field.tag().implies(need) {
                return Err(Error::invalid(format!(
                    "coefficient {name} is tagged {:?} but must lie in {need:?}",
                    field.tag()
                )));
            }
        }
        Ok(c)
    }

    pub fn zero() -> Self {
        Self {
            a21: Field2D::zero(),
            a12: Field2D::zero(),
            a20: Field2D::zero(),
            a02: Field2D::zero(),
            a11: Field2D::zero(),
            a10: Field2D::zero(),
            a01: Field2D::zero(),
            a00: Field2D::zero(),
        }
    }

    pub fn required_class(name: &str) -> SmoothnessTag {
        match name {
            "a21" | "a20" => SmoothnessTag::LinfXLpY,
            "a12" | "a02" => SmoothnessTag::LpXLinfY,
            _ => SmoothnessTag::Lp,
        }
    }

    pub fn named(&self) -> [(&'static str, &Field2D); 8] {
        [
            ("a21", &self.a21),
            ("a12", &self.a12),
            ("a20", &self.a20),
            ("a02", &self.a02),
            ("a11", &self.a11),
            ("a10", &self.a10),
            ("a01", &self.a01),
            ("a00", &self.a00),
        ]
    }

    pub fn at(&self, x: f64, y: f64) -> CoeffValues {
        CoeffValues {
            a21: self.a21.eval(x, y),
            a12: self.a12.eval(x, y),
            a20: self.a20.eval(x, y),
            a02: self.a02.eval(x, y),
            a11: self.a11.eval(x, y),
            a10: self.a10.eval(x, y),
            a01: self.a01.eval(x, y),
            a00: self.a00.eval(x, y),
        }
    }

    pub fn all_zero(&self) -> bool {
        self.named().iter().all(|(_, f)| f.is_zero())
    }

    /// Discontinuity lines of all piecewise coefficients strictly inside the
    /// domain, sorted and deduplicated.
    pub fn breakpoints(&self, domain: Domain) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (_, f) in self.named() {
            let (fx, fy) = f.breakpoints();
            xs.extend(fx);
            ys.extend(fy);
        }
        let clean = |mut v: Vec<f64>, len: f64| {
            v.retain(|&t| t > 1e-12 * len && t < len * (1.0 - 1e-12));
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * len);
            v
        };
        (clean(xs, domain.h1()), clean(ys, domain.h2()))
    }

    pub fn sample(&self, grid: &Grid2D) -> CoefficientGrid {
        let mut values = Vec::with_capacity(grid.len());
        for &y in grid.y().nodes() {
            for &x in grid.x().nodes() {
                values.push(self.at(x, y));
            }
        }
        CoefficientGrid {
            n1: grid.n1(),
            values,
        }
    }
}

/// Coefficient values at every node of a grid, y outermost.
#[derive(Debug, Clone)]
pub struct CoefficientGrid {
    n1: usize,
    values: Vec<CoeffValues>,
}

impl CoefficientGrid {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &CoeffValues {
        &self.values[j * self.n1 + i]
    }

    pub fn values(&self) -> &[CoeffValues] {
        &self.values
    }
}

/// The eleven nonclassical boundary components.
///
/// `z20`, `z20_h2` live on `[0, h1]`; `z02`, `z02_h1` on `[0, h2]`.
#[derive(Debug, Clone)]
pub struct NonclassicalData {
    /// `u(0, 0)`
    pub z00: f64,
    /// `u_x(0, 0)`
    pub z10: f64,
    /// `u_y(0, 0)`
    pub z01: f64,
    /// `u_xx(x, 0)`
    pub z20: Field1D,
    /// `u_yy(0, y)`
    pub z02: Field1D,
    /// `u(h1, 0)`
    pub z00_h1: f64,
    /// `u_y(h1, 0)`
    pub z01_h1: f64,
    /// `u_yy(h1, y)`
    pub z02_h1: Field1D,
    /// `u(0, h2)`
    pub z00_h2: f64,
    /// `u_x(0, h2)`
    pub z10_h2: f64,
    /// `u_xx(x, h2)`
    pub z20_h2: Field1D,
}

impl NonclassicalData {
    pub fn zero() -> Self {
        Self {
            z00: 0.0,
            z10: 0.0,
            z01: 0.0,
            z20: Field1D::zero(),
            z02: Field1D::zero(),
            z00_h1: 0.0,
            z01_h1: 0.0,
            z02_h1: Field1D::zero(),
            z00_h2: 0.0,
            z10_h2: 0.0,
            z20_h2: Field1D::zero(),
        }
    }

    pub fn scalars(&self) -> [(&'static str, f64); 7] {
        [
            ("z00", self.z00),
            ("z10", self.z10),
            ("z01", self.z01),
            ("z00_h1", self.z00_h1),
            ("z01_h1", self.z01_h1),
            ("z00_h2", self.z00_h2),
            ("z10_h2", self.z10_h2),
        ]
    }

    /// Function components with a flag telling whether they live on x.
    pub fn functions(&self) -> [(&'static str, &Field1D, bool); 4] {
        [
            ("z20", &self.z20, true),
            ("z02", &self.z02, false),
            ("z02_h1", &self.z02_h1, false),
            ("z20_h2", &self.z20_h2, true),
        ]
    }

    /// `a self + b other`, component by component.
    pub fn combine(a: f64, z: &Self, b: f64, w: &Self) -> Self {
        let f = |p: &Field1D, q: &Field1D| Field1D::combine(a, p, b, q);
        Self {
            z00: a * z.z00 + b * w.z00,
            z10: a * z.z10 + b * w.z10,
            z01: a * z.z01 + b * w.z01,
            z20: f(&z.z20, &w.z20),
            z02: f(&z.z02, &w.z02),
            z00_h1: a * z.z00_h1 + b * w.z00_h1,
            z01_h1: a * z.z01_h1 + b * w.z01_h1,
            z02_h1: f(&z.z02_h1, &w.z02_h1),
            z00_h2: a * z.z00_h2 + b * w.z00_h2,
            z10_h2: a * z.z10_h2 + b * w.z10_h2,
            z20_h2: f(&z.z20_h2, &w.z20_h2),
        }
    }

    /// Overwrites `z00_h1`, `z00_h2` and `z10_h2` so that all three
    /// admissibility constraints hold exactly (up to the accuracy of
    /// [`Field1D::accurate_moment`]).
    pub fn complete_admissible(&mut self, domain: Domain) {
        let (h1, h2) = (domain.h1(), domain.h2());
        let mx = |f: &Field1D| f.accurate_moment(h1);
        let my = |f: &Field1D| f.accurate_moment(h2);
        self.z00_h1 = self.z00 + h1 * self.z10 + mx(&self.z20);
        self.z00_h2 = self.z00 + h2 * self.z01 + my(&self.z02);
        let dz01 = self.z01_h1 - self.z01;
        let d_z02 = my(&self.z02_h1) - my(&self.z02);
        let d_z20 = mx(&self.z20_h2) - mx(&self.z20);
        self.z10_h2 = self.z10 + (h2 * dz01 + d_z02 - d_z20) / h1;
    }

    /// Largest magnitude among the scalars and the function samples.
    pub fn scale(&self, grid: &Grid2D) -> f64 {
        let mut m = self
            .scalars()
            .iter()
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        for (_, f, on_x) in self.functions() {
            let axis = if on_x { grid.x() } else { grid.y() };
            m = f.sample(axis).iter().fold(m, |m, v| m.max(v.abs()));
        }
        m
    }
}

/// The full boundary-value problem.
#[derive(Debug, Clone)]
pub struct PdeProblem {
    pub domain: Domain,
    pub coeffs: Coefficients,
    /// Right-hand side `Z_22`.
    pub z22: Field2D,
    pub data: NonclassicalData,
}

/// Classical Dirichlet traces: `phi1 = u(0, y)`, `phi2 = u(h1, y)`,
/// `psi1 = u(x, 0)`, `psi2 = u(x, h2)`.
#[derive(Debug, Clone)]
pub struct ClassicalData {
    pub phi1: Field1D,
    pub phi2: Field1D,
    pub psi1: Field1D,
    pub psi2: Field1D,
}

impl ClassicalData {
    pub fn is_analytic(&self) -> bool {
        [&self.phi1, &self.phi2, &self.psi1, &self.psi2]
            .iter()
            .all(|f| f.is_analytic())
    }

    /// Default corner tolerance for this kind of data.
    pub fn corner_tolerance(&self) -> f64 {
        if self.is_analytic() {
            CORNER_TOL_ANALYTIC
        } else {
            CORNER_TOL_SAMPLED
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

/// Named absolute residuals checked against one tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub residuals: Vec<Residual>,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    pub fn new(residuals: Vec<(&str, f64)>, tolerance: f64) -> Self {
        let residuals: Vec<Residual> = residuals
            .into_iter()
            .map(|(name, value)| Residual {
                name: name.to_string(),
                value: value.abs(),
            })
            .collect();
        let passed = residuals.iter().all(|r| r.value <= tolerance);
        Self {
            residuals,
            tolerance,
            passed,
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.value))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| r.value > self.tolerance)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.residuals {
            let mark = if r.value <= self.tolerance {
                "ok"
            } else {
                "FAIL"
            };
            writeln!(f, "  {:<14} {:>12.3e}  {mark}", r.name, r.value)?;
        }
        write!(f, "  tolerance {:.3e}", self.tolerance)
    }
}

/// First derivative at 0 and the second derivative of `f` as a field, using
/// the attached evaluators when present and finite differences otherwise.
fn trace_derivatives(f: &Field1D, axis: &Axis) -> (f64, Field1D) {
    if f.has_derivatives() {
        let g = f.clone();
        let d0 = f.derivative(1, 0.0).expect("derivatives present");
        return (
            d0,
            Field1D::analytic(move |t| g.derivative(2, t).unwrap_or(0.0)),
        );
    }
    let nodes: Vec<f64> = match f.sample_nodes() {
        Some(n) if n.len() >= 4 => n.to_vec(),
        _ => axis.nodes().to_vec(),
    };
    let values: Vec<f64> = nodes.iter().map(|&t| f.eval(t)).collect();
    let (d1, d2) = differentiate(&nodes, &values);
    let second = Field1D::samples(nodes, d2).expect("nodes are increasing");
    (d1[0], second)
}

/// Nonclassical data carried by classical traces.
///
/// Derivatives come from the fields' evaluators when available and from
/// finite differences on the grid otherwise.
pub fn classical_to_nonclassical(
    cd: &ClassicalData,
    grid: &Grid2D,
    corner_tol: f64,
) -> Result<NonclassicalData> {
    let (phi1_0, psi1_0) = (cd.phi1.eval(0.0), cd.psi1.eval(0.0));
    if (phi1_0 - psi1_0).abs() > corner_tol {
        return Err(Error::CornerMismatch {
            phi1: phi1_0,
            psi1: psi1_0,
        });
    }
    let (z10, z20) = trace_derivatives(&cd.psi1, grid.x());
    let (z01, z02) = trace_derivatives(&cd.phi1, grid.y());
    let (z01_h1, z02_h1) = trace_derivatives(&cd.phi2, grid.y());
    let (z10_h2, z20_h2) = trace_derivatives(&cd.psi2, grid.x());
    Ok(NonclassicalData {
        z00: phi1_0,
        z10,
        z01,
        z20,
        z02,
        z00_h1: cd.phi2.eval(0.0),
        z01_h1,
        z02_h1,
        z00_h2: cd.psi2.eval(0.0),
        z10_h2,
        z20_h2,
    })
}

fn taylor_trace(axis: &Axis, value: f64, slope: f64, curvature: &Field1D) -> Field1D {
    let second = curvature.sample(axis);
    let moments = axis.moments(&second);
    let values: Vec<f64> = axis
        .nodes()
        .iter()
        .zip(&moments)
        .map(|(&t, m)| value + t * slope + m)
        .collect();
    Field1D::samples(axis.nodes().to_vec(), values).expect("axis nodes are increasing")
}

/// Classical traces `value + t slope + int_0^t (t - s) curvature(s) ds`,
/// sampled on the grid axes. The results carry no derivative evaluators.
pub fn nonclassical_to_classical(z: &NonclassicalData, grid: &Grid2D) -> ClassicalData {
    ClassicalData {
        phi1: taylor_trace(grid.y(), z.z00, z.z01, &z.z02),
        phi2: taylor_trace(grid.y(), z.z00_h1, z.z01_h1, &z.z02_h1),
        psi1: taylor_trace(grid.x(), z.z00, z.z10, &z.z20),
        psi2: taylor_trace(grid.x(), z.z00_h2, z.z10_h2, &z.z20_h2),
    }
}

/// Like [`nonclassical_to_classical`] but attaches sampled first and second
/// derivatives, so converting back involves no differencing.
pub fn nonclassical_to_classical_with_derivatives(
    z: &NonclassicalData,
    grid: &Grid2D,
) -> ClassicalData {
    let with = |axis: &Arc<Axis>, value: f64, slope: f64, curv: &Field1D| {
        let base = taylor_trace(axis, value, slope, curv);
        let second = curv.sample(axis);
        let first: Vec<f64> = axis.cumulative(&second).iter().map(|c| slope + c).collect();
        base.with_derivative_samples(first, second)
            .expect("samples field on the axis")
    };
    ClassicalData {
        phi1: with(grid.y(), z.z00, z.z01, &z.z02),
        phi2: with(grid.y(), z.z00_h1, z.z01_h1, &z.z02_h1),
        psi1: with(grid.x(), z.z00, z.z10, &z.z20),
        psi2: with(grid.x(), z.z00_h2, z.z10_h2, &z.z20_h2),
    }
}

/// Like [`nonclassical_to_classical_with_derivatives`] but with every
/// integral evaluated by [`Field1D::accurate_moment`] and
/// [`Field1D::accurate_integral`] instead of the grid rule.
pub fn nonclassical_to_classical_accurate(z: &NonclassicalData, grid: &Grid2D) -> ClassicalData {
    let trace = |axis: &Arc<Axis>, value: f64, slope: f64, curv: &Field1D| {
        let nodes = axis.nodes().to_vec();
        let values = nodes
            .iter()
            .map(|&t| value + t * slope + curv.accurate_moment(t))
            .collect();
        let first = nodes
            .iter()
            .map(|&t| slope + curv.accurate_integral(t))
            .collect();
        let second = curv.sample(axis);
        Field1D::samples(nodes, values)
            .and_then(|f| f.with_derivative_samples(first, second))
            .expect("axis nodes are increasing")
    };
    ClassicalData {
        phi1: trace(grid.y(), z.z00, z.z01, &z.z02),
        phi2: trace(grid.y(), z.z00_h1, z.z01_h1, &z.z02_h1),
        psi1: trace(grid.x(), z.z00, z.z10, &z.z20),
        psi2: trace(grid.x(), z.z00_h2, z.z10_h2, &z.z20_h2),
    }
}

/// The four corner matching relations of classical Dirichlet data.
pub fn check_matching(cd: &ClassicalData, domain: Domain, tol: f64) -> CheckReport {
    let (h1, h2) = (domain.h1(), domain.h2());
    CheckReport::new(
        vec![
            ("phi1(0)-psi1(0)", cd.phi1.eval(0.0) - cd.psi1.eval(0.0)),
            ("phi2(h2)-psi2(h1)", cd.phi2.eval(h2) - cd.psi2.eval(h1)),
            ("phi1(h2)-psi2(0)", cd.phi1.eval(h2) - cd.psi2.eval(0.0)),
            ("phi2(0)-psi1(h1)", cd.phi2.eval(0.0) - cd.psi1.eval(h1)),
        ],
        tol,
    )
}

/// Relations the nonclassical data must satisfy for a solution to exist.
///
/// * `u(h1,0)`: `Z00 + h1 Z10 + int (h1 - a) Z20 = Z00^(h1)`
/// * `u(0,h2)`: `Z00 + h2 Z01 + int (h2 - b) Z02 = Z00^(h2)`
/// * `u(h1,h2)`: `h1 dZ10 + int (h1 - a) dZ20 = h2 dZ01 + int (h2 - b) dZ02`,
///   with `dZ10 = Z10^(h2) - Z10`, `dZ20 = Z20^(h2) - Z20`,
///   `dZ01 = Z01^(h1) - Z01`, `dZ02 = Z02^(h1) - Z02`. It equates the two
///   ways of reaching the far corner, and is what makes the two expressions
///   for `b11` agree.
///
/// Integrals are evaluated with [`Field1D::accurate_moment`], not with the
/// grid rule.
pub fn check_data_constraints(z: &NonclassicalData, domain: Domain, tol: f64) -> CheckReport {
    let (h1, h2) = (domain.h1(), domain.h2());
    let mx = |f: &Field1D| f.accurate_moment(h1);
    let my = |f: &Field1D| f.accurate_moment(h2);
    let r1 = z.z00 + h1 * z.z10 + mx(&z.z20) - z.z00_h1;
    let r2 = z.z00 + h2 * z.z01 + my(&z.z02) - z.z00_h2;
    let r3 = h1 * (z.z10_h2 - z.z10) + mx(&z.z20_h2)
        - mx(&z.z20)
        - h2 * (z.z01_h1 - z.z01)
        - my(&z.z02_h1)
        + my(&z.z02);
    CheckReport::new(
        vec![("u(h1,0)", r1), ("u(0,h2)", r2), ("u(h1,h2)", r3)],
        tol,
    )
}

/// Default tolerance for [`check_data_constraints`].
pub fn default_constraint_tolerance(z: &NonclassicalData, grid: &Grid2D) -> f64 {
    let (h1, h2) = (grid.domain().h1(), grid.domain().h2());
    CONSTRAINT_REL_TOL * (1.0 + z.scale(grid)) * (1.0 + h1.max(h2)).powi(2)
}

/// Richardson estimate of the trapezoid error in the full first moments of
/// the four function components, summed.
pub fn quadrature_error_estimate(z: &NonclassicalData, grid: &Grid2D) -> f64 {
    z.functions()
        .iter()
        .map(|(_, f, on_x)| {
            let axis = if *on_x { grid.x() } else { grid.y() };
            let fine = axis.refined();
            let coarse = axis.full_moment(&f.sample(axis));
            let refined = fine.full_moment(&f.sample(&fine));
            (coarse - refined).abs() * 4.0 / 3.0
        })
        .sum()
}
