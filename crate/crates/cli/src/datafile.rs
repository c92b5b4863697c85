//! JSON files of boundary data written by `convert` and readable as config
//! input.

use std::collections::BTreeMap;
use std::path::Path;

use mangeron::expr::{Expr, Var};
use mangeron::fields::{Axis, Domain, Field1D, Grid2D};
use mangeron::problem::{ClassicalData, NonclassicalData};
use serde::{Deserialize, Serialize};

use crate::config::Input;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Classical,
    Nonclassical,
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DataKind::Classical => "classical",
            DataKind::Nonclassical => "nonclassical",
        })
    }
}

impl std::str::FromStr for DataKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(DataKind::Classical),
            "nonclassical" => Ok(DataKind::Nonclassical),
            _ => Err(CliError::Config(format!(
                "unknown data kind {s:?}; expected classical or nonclassical"
            ))),
        }
    }
}

/// One function component sampled on a grid axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledFunction {
    /// `"x"` or `"y"`.
    pub axis: String,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<Vec<f64>>,
    /// Generating expression, when one is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
}

impl SampledFunction {
    pub fn new(f: &Field1D, axis: &Axis, along_x: bool, expr: Option<String>) -> Self {
        let nodes = axis.nodes().to_vec();
        let derivative = |k: usize| {
            f.has_derivatives().then(|| {
                nodes
                    .iter()
                    .map(|&t| f.derivative(k, t).unwrap_or(0.0))
                    .collect()
            })
        };
        Self {
            axis: if along_x { "x" } else { "y" }.to_string(),
            values: f.sample(axis),
            d1: derivative(1),
            d2: derivative(2),
            nodes,
            expr,
        }
    }

    fn field(&self, name: &str) -> Result<Field1D> {
        let var = match self.axis.as_str() {
            "x" => Var::X,
            "y" => Var::Y,
            a => return Err(CliError::Config(format!("{name}: unknown axis {a:?}"))),
        };
        if let Some(src) = &self.expr {
            return Expr::parse(src)
                .and_then(|e| e.to_field1d(var))
                .map_err(|e| CliError::Config(format!("{name}: {e}")));
        }
        let bad = |e: mangeron::Error| CliError::Config(format!("{name}: {e}"));
        let f = Field1D::samples(self.nodes.clone(), self.values.clone()).map_err(bad)?;
        match (&self.d1, &self.d2) {
            (Some(d1), Some(d2)) => f
                .with_derivative_samples(d1.clone(), d2.clone())
                .map_err(bad),
            _ => Ok(f),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainInfo {
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataFile {
    pub kind: DataKind,
    pub domain: DomainInfo,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
    pub functions: BTreeMap<String, SampledFunction>,
}

const CLASSICAL: [(&str, bool); 4] = [
    ("phi1", false),
    ("phi2", false),
    ("psi1", true),
    ("psi2", true),
];

impl DataFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn classical(
        cd: &ClassicalData,
        grid: &Grid2D,
        sources: &BTreeMap<&'static str, String>,
    ) -> Self {
        let fields = [&cd.phi1, &cd.phi2, &cd.psi1, &cd.psi2];
        let functions = CLASSICAL
            .iter()
            .zip(fields)
            .map(|((name, on_x), f)| {
                let axis = if *on_x { grid.x() } else { grid.y() };
                let expr = sources.get(name).cloned();
                (name.to_string(), SampledFunction::new(f, axis, *on_x, expr))
            })
            .collect();
        Self {
            kind: DataKind::Classical,
            domain: domain_info(grid.domain()),
            scalars: BTreeMap::new(),
            functions,
        }
    }

    pub fn nonclassical(
        z: &NonclassicalData,
        grid: &Grid2D,
        sources: &BTreeMap<&'static str, String>,
    ) -> Self {
        let scalars = z
            .scalars()
            .iter()
            .map(|(n, v)| (n.to_string(), *v))
            .collect();
        let functions = z
            .functions()
            .iter()
            .map(|(name, f, on_x)| {
                let axis = if *on_x { grid.x() } else { grid.y() };
                let expr = sources.get(name).cloned();
                (name.to_string(), SampledFunction::new(f, axis, *on_x, expr))
            })
            .collect();
        Self {
            kind: DataKind::Nonclassical,
            domain: domain_info(grid.domain()),
            scalars,
            functions,
        }
    }

    pub fn into_input(self, domain: Domain) -> Result<Input> {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
        if !close(self.domain.h1, domain.h1()) || !close(self.domain.h2, domain.h2()) {
            return Err(CliError::Config(format!(
                "data file is for [0, {}] x [0, {}], config domain is [0, {}] x [0, {}]",
                self.domain.h1,
                self.domain.h2,
                domain.h1(),
                domain.h2()
            )));
        }
        let mut sources = BTreeMap::new();
        let mut take = |name: &'static str| -> Result<Field1D> {
            let f = self
                .functions
                .get(name)
                .ok_or_else(|| CliError::Config(format!("data file lacks function {name}")))?;
            if let Some(e) = &f.expr {
                sources.insert(name, e.clone());
            }
            f.field(name)
        };
        match self.kind {
            DataKind::Classical => {
                let data = ClassicalData {
                    phi1: take("phi1")?,
                    phi2: take("phi2")?,
                    psi1: take("psi1")?,
                    psi2: take("psi2")?,
                };
                Ok(Input::Classical { data, sources })
            }
            DataKind::Nonclassical => {
                let (z20, z02, z02_h1, z20_h2) =
                    (take("z20")?, take("z02")?, take("z02_h1")?, take("z20_h2")?);
                let s = |name: &str| {
                    self.scalars
                        .get(name)
                        .copied()
                        .ok_or_else(|| CliError::Config(format!("data file lacks scalar {name}")))
                };
                let data = NonclassicalData {
                    z00: s("z00")?,
                    z10: s("z10")?,
                    z01: s("z01")?,
                    z20,
                    z02,
                    z00_h1: s("z00_h1")?,
                    z01_h1: s("z01_h1")?,
                    z02_h1,
                    z00_h2: s("z00_h2")?,
                    z10_h2: s("z10_h2")?,
                    z20_h2,
                };
                Ok(Input::Nonclassical { data, sources })
            }
        }
    }
}

fn domain_info(d: Domain) -> DomainInfo {
    DomainInfo {
        h1: d.h1(),
        h2: d.h2(),
    }
}
