use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::Grid2D;
use super::gridfn::{GridFn1D, GridFn2D};
use crate::error::{Error, Result};
use crate::problem::NonclassicalData;
use crate::solver::SolutionBundle;

/// Exponent `p` of an `L_p` norm, `1 <= p <= inf`.
///
/// For `p = inf` the discrete norm is the maximum over nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct NormSpec {
    p: f64,
}

impl NormSpec {
    pub const L1: NormSpec = NormSpec { p: 1.0 };
    pub const L2: NormSpec = NormSpec { p: 2.0 };
    pub const INF: NormSpec = NormSpec { p: f64::INFINITY };

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::invalid(format!(
                "norm exponent must satisfy p >= 1, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_infinite(&self) -> bool {
        self.p.is_infinite()
    }
}

impl Default for NormSpec {
    fn default() -> Self {
        Self::L2
    }
}

impl TryFrom<f64> for NormSpec {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<NormSpec> for f64 {
    fn from(s: NormSpec) -> f64 {
        s.p
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.p)
        }
    }
}

fn weighted_norm(values: impl Iterator<Item = (f64, f64)>, spec: NormSpec) -> f64 {
    if spec.is_infinite() {
        return values.fold(0.0, |m, (_, v)| m.max(v.abs()));
    }
    let p = spec.p;
    let sum: f64 = if p == 1.0 {
        values.map(|(w, v)| w * v.abs()).sum()
    } else if p == 2.0 {
        values.map(|(w, v)| w * v * v).sum()
    } else {
        values.map(|(w, v)| w * v.abs().powf(p)).sum()
    };
    sum.powf(1.0 / p)
}

/// Discrete `L_p` norm of a grid function.
pub trait LpNorm {
    fn lp_norm(&self, spec: NormSpec) -> f64;
}

impl LpNorm for GridFn1D {
    fn lp_norm(&self, spec: NormSpec) -> f64 {
        let w = self.axis().weights();
        weighted_norm(w.iter().copied().zip(self.values().iter().copied()), spec)
    }
}

impl LpNorm for GridFn2D {
    fn lp_norm(&self, spec: NormSpec) -> f64 {
        let g = self.grid();
        let wx = g.x().weights();
        let wy = g.y().weights();
        let n1 = g.n1();
        let it = self
            .values()
            .iter()
            .enumerate()
            .map(|(k, &v)| (wx[k % n1] * wy[k / n1], v));
        weighted_norm(it, spec)
    }
}

pub fn lp_norm(f: &impl LpNorm, spec: NormSpec) -> f64 {
    f.lp_norm(spec)
}

/// `W_p^(2,2)` norm: sum of the nine `L_p` norms of `D_x^i D_y^j u`.
pub fn wp22_norm(bundle: &SolutionBundle, spec: NormSpec) -> f64 {
    bundle
        .derivatives()
        .iter()
        .map(|(_, f)| f.lp_norm(spec))
        .sum()
}

/// `E_p^(2,2)` norm of the eleven boundary components, with the function
/// components sampled on the grid axes.
pub fn ep22_norm(z: &NonclassicalData, grid: &Grid2D, spec: NormSpec) -> f64 {
    let on_x = |f: &crate::fields::Field1D| {
        GridFn1D::new(grid.x().clone(), f.sample(grid.x()))
            .expect("sampled on the axis")
            .lp_norm(spec)
    };
    let on_y = |f: &crate::fields::Field1D| {
        GridFn1D::new(grid.y().clone(), f.sample(grid.y()))
            .expect("sampled on the axis")
            .lp_norm(spec)
    };
    z.z00.abs()
        + z.z10.abs()
        + z.z01.abs()
        + on_x(&z.z20)
        + on_y(&z.z02)
        + z.z00_h1.abs()
        + z.z01_h1.abs()
        + on_y(&z.z02_h1)
        + z.z00_h2.abs()
        + z.z10_h2.abs()
        + on_x(&z.z20_h2)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fields::{build_grid, Domain, Field1D};

    fn unit(n: usize) -> Arc<Grid2D> {
        Arc::new(build_grid(Domain::unit(), n, n, &[], &[]).unwrap())
    }

    #[test]
    fn constant_norms() {
        let g = unit(5);
        let three = GridFn2D::from_fn(g.clone(), |_, _| 3.0);
        assert_eq!(three.lp_norm(NormSpec::INF), 3.0);
        let one = GridFn2D::from_fn(g, |_, _| 1.0);
        assert!((one.lp_norm(NormSpec::L2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linear_l2() {
        let f = GridFn2D::from_fn(unit(21), |x, _| x);
        let v = f.lp_norm(NormSpec::L2);
        assert!((v - 3f64.sqrt().recip()).abs() < 5e-3);
    }

    #[test]
    fn bad_exponent() {
        assert!(NormSpec::new(0.5).is_err());
        assert!(NormSpec::new(f64::NAN).is_err());
        assert!(NormSpec::new(f64::INFINITY).unwrap().is_infinite());
    }

    #[test]
    fn ep22_examples() {
        let g = unit(9);
        let mut z = NonclassicalData::zero();
        assert_eq!(ep22_norm(&z, &g, NormSpec::L2), 0.0);
        z.z00 = 2.0;
        assert_eq!(ep22_norm(&z, &g, NormSpec::L2), 2.0);
        let mut z = NonclassicalData::zero();
        z.z20 = Field1D::constant(1.0);
        assert!((ep22_norm(&z, &g, NormSpec::L1) - 1.0).abs() < 1e-15);
    }
}
