//! Run configuration files.
//!
//! A config is TOML:
//!
//! ```toml
//! [domain]
//! h1 = 1.0
//! h2 = 1.0
//!
//! [grid]
//! n1 = 21
//! n2 = 21
//! x_breakpoints = []       # optional extra nodes
//!
//! [coefficients]           # omitted coefficients are zero
//! a00 = "1 + 0.5*sin(x*y)"
//! a11 = { piecewise = [
//!     { x = [0.0, 0.5], y = [0.0, 1.0], value = 1.0 },
//!     { x = [0.5, 1.0], y = [0.0, 1.0], value = "2*y" },
//! ] }
//!
//! [rhs]
//! z22 = "4 + x^2*y^2"
//!
//! [data.nonclassical]      # or [data.classical], or [data] file = "..."
//! z02_h1 = 2.0
//! z20_h2 = "2"
//!
//! [solver]                 # all optional
//! method = "auto"          # auto | neumann | dense | coupled
//! tol = 1e-10
//! max_iter = 200
//! p = 2                    # or "inf"
//! force = false
//!
//! [exact]                  # optional, for error reporting
//! u = "x^2*y^2"
//! ```
//!
//! Expressions use the grammar of [`mangeron::expr`]; a plain number or the
//! word `zero` also works anywhere an expression does.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mangeron::expr::{Expr, Var};
use mangeron::fields::{build_grid, Domain, Field1D, Field2D, Grid2D, NormSpec, Rect};
use mangeron::problem::{
    classical_to_nonclassical, ClassicalData, Coefficients, NonclassicalData, PdeProblem,
};
use mangeron::solver::{Method, SolveOptions};
use serde::Deserialize;

use crate::datafile::{DataFile, DataKind};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub coefficients: CoefficientSpec,
    #[serde(default)]
    pub rhs: RhsSpec,
    pub data: DataSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    pub exact: Option<ExactSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub h1: f64,
    pub h2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n1: usize,
    pub n2: usize,
    #[serde(default)]
    pub x_breakpoints: Vec<f64>,
    #[serde(default)]
    pub y_breakpoints: Vec<f64>,
}

/// A number or an expression string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Expr(String),
}

impl Default for Value {
    fn default() -> Self {
        Value::Number(0.0)
    }
}

impl Value {
    fn expr(&self, what: &str) -> Result<Expr> {
        match self {
            Value::Number(c) => Ok(Expr::constant(*c)),
            Value::Expr(s) => Expr::parse(s).map_err(|e| CliError::Config(format!("{what}: {e}"))),
        }
    }

    fn constant(&self, what: &str) -> Result<f64> {
        self.expr(what)?
            .as_constant()
            .ok_or_else(|| CliError::Config(format!("{what} must be a constant")))
    }

    fn field1d(&self, what: &str, v: Var) -> Result<Field1D> {
        self.expr(what)?
            .to_field1d(v)
            .map_err(|e| CliError::Config(format!("{what}: {e}")))
    }

    fn source(&self) -> Option<String> {
        match self {
            Value::Number(c) => Some(Expr::constant(*c).to_string()),
            Value::Expr(s) => Some(s.clone()),
        }
    }
}

/// A field on the rectangle: an expression or rectangles of expressions.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Value(Value),
    Piecewise { piecewise: Vec<PieceSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub value: Value,
}

impl FieldSpec {
    fn field2d(&self, what: &str, domain: Domain) -> Result<Field2D> {
        match self {
            FieldSpec::Value(v) => Ok(v.expr(what)?.to_field2d()),
            FieldSpec::Piecewise { piecewise } => {
                let pieces = piecewise
                    .iter()
                    .map(|p| {
                        let rect = Rect::new(p.x[0], p.x[1], p.y[0], p.y[1]);
                        Ok((rect, p.value.expr(what)?.to_field2d()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Field2D::piecewise(domain, pieces)
                    .map_err(|e| CliError::Config(format!("{what}: {e}")))
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub a21: Option<FieldSpec>,
    pub a12: Option<FieldSpec>,
    pub a20: Option<FieldSpec>,
    pub a02: Option<FieldSpec>,
    pub a11: Option<FieldSpec>,
    pub a10: Option<FieldSpec>,
    pub a01: Option<FieldSpec>,
    pub a00: Option<FieldSpec>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhsSpec {
    pub z22: Option<FieldSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub nonclassical: Option<NonclassicalSpec>,
    pub classical: Option<ClassicalSpec>,
    /// A data file written by `convert`, relative to the config.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonclassicalSpec {
    #[serde(default)]
    pub z00: Value,
    #[serde(default)]
    pub z10: Value,
    #[serde(default)]
    pub z01: Value,
    #[serde(default)]
    pub z20: Value,
    #[serde(default)]
    pub z02: Value,
    #[serde(default)]
    pub z00_h1: Value,
    #[serde(default)]
    pub z01_h1: Value,
    #[serde(default)]
    pub z02_h1: Value,
    #[serde(default)]
    pub z00_h2: Value,
    #[serde(default)]
    pub z10_h2: Value,
    #[serde(default)]
    pub z20_h2: Value,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    #[serde(default)]
    pub phi1: Value,
    #[serde(default)]
    pub phi2: Value,
    #[serde(default)]
    pub psi1: Value,
    #[serde(default)]
    pub psi2: Value,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Number(f64),
    Text(String),
}

impl PSpec {
    fn norm(&self) -> Result<NormSpec> {
        let p = match self {
            PSpec::Number(p) => *p,
            PSpec::Text(s) => parse_p(s)?.p(),
        };
        NormSpec::new(p).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_p")]
    pub p: PSpec,
    #[serde(default)]
    pub force: bool,
    pub constraint_tol: Option<f64>,
}

fn default_tol() -> f64 {
    SolveOptions::default().tol
}

fn default_max_iter() -> usize {
    SolveOptions::default().max_iter
}

fn default_p() -> PSpec {
    PSpec::Number(2.0)
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            tol: default_tol(),
            max_iter: default_max_iter(),
            p: default_p(),
            force: false,
            constraint_tol: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSpec {
    pub u: String,
}

/// Command-line settings that take precedence over the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub method: Option<Method>,
    pub grid: Option<(usize, usize)>,
    pub p: Option<NormSpec>,
    pub force: bool,
}

/// `N1xN2`, or a single `N` for a square grid.
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let bad = || CliError::Config(format!("grid must look like 33x33, got {s:?}"));
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

/// A number `>= 1` or `inf`.
pub fn parse_p(s: &str) -> Result<NormSpec> {
    let p = match s.trim() {
        "inf" | "infinity" => f64::INFINITY,
        t => t
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("p must be a number or inf, got {s:?}")))?,
    };
    NormSpec::new(p).map_err(|e| CliError::Config(e.to_string()))
}

/// Boundary data as given in the config, with the expressions they came from.
#[derive(Debug, Clone)]
pub enum Input {
    Nonclassical {
        data: NonclassicalData,
        sources: BTreeMap<&'static str, String>,
    },
    Classical {
        data: ClassicalData,
        sources: BTreeMap<&'static str, String>,
    },
}

impl Input {
    pub fn kind(&self) -> DataKind {
        match self {
            Input::Nonclassical { .. } => DataKind::Nonclassical,
            Input::Classical { .. } => DataKind::Classical,
        }
    }
}

/// A config resolved into solver inputs.
#[derive(Debug, Clone)]
pub struct Setup {
    pub domain: Domain,
    pub coeffs: Coefficients,
    pub z22: Field2D,
    pub input: Input,
    pub grid: Arc<Grid2D>,
    pub opts: SolveOptions,
    pub exact: Option<Expr>,
}

impl Setup {
    /// Reads and resolves the config at `path`.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::resolve(&cfg, base, overrides)
    }

    pub fn resolve(cfg: &RunConfig, base: &Path, overrides: &Overrides) -> Result<Self> {
        let domain = Domain::new(cfg.domain.h1, cfg.domain.h2)?;
        let coeffs = coefficients(&cfg.coefficients, domain)?;
        let z22 = match &cfg.rhs.z22 {
            Some(f) => f.field2d("z22", domain)?,
            None => Field2D::zero(),
        };
        let input = input(&cfg.data, base, domain)?;

        let (n1, n2) = overrides.grid.unwrap_or((cfg.grid.n1, cfg.grid.n2));
        let (mut xb, mut yb) = coeffs.breakpoints(domain);
        let (rx, ry) = z22.breakpoints();
        xb.extend(rx.into_iter().chain(cfg.grid.x_breakpoints.iter().copied()));
        yb.extend(ry.into_iter().chain(cfg.grid.y_breakpoints.iter().copied()));
        let interior = |v: &mut Vec<f64>, h: f64| {
            v.retain(|&t| t > 0.0 && t < h);
            v.sort_by(f64::total_cmp);
            v.dedup();
        };
        interior(&mut xb, domain.h1());
        interior(&mut yb, domain.h2());
        let grid = Arc::new(build_grid(domain, n1, n2, &xb, &yb)?);

        let s = &cfg.solver;
        if !(s.tol > 0.0) {
            return Err(CliError::Config(format!(
                "solver.tol must be positive, got {}",
                s.tol
            )));
        }
        let opts = SolveOptions {
            method: overrides.method.unwrap_or(s.method),
            tol: s.tol,
            max_iter: s.max_iter,
            norm: match overrides.p {
                Some(p) => p,
                None => s.p.norm()?,
            },
            force: s.force || overrides.force,
            constraint_tol: s.constraint_tol,
        };
        let exact = match &cfg.exact {
            Some(e) => {
                Some(Expr::parse(&e.u).map_err(|err| CliError::Config(format!("exact.u: {err}")))?)
            }
            None => None,
        };
        Ok(Self {
            domain,
            coeffs,
            z22,
            input,
            grid,
            opts,
            exact,
        })
    }

    /// Nonclassical data on the grid, converting classical input.
    pub fn nonclassical(&self) -> Result<NonclassicalData> {
        match &self.input {
            Input::Nonclassical { data, .. } => Ok(data.clone()),
            Input::Classical { data, .. } => Ok(classical_to_nonclassical(
                data,
                &self.grid,
                data.corner_tolerance(),
            )?),
        }
    }

    pub fn problem(&self) -> Result<PdeProblem> {
        Ok(PdeProblem {
            domain: self.domain,
            coeffs: self.coeffs.clone(),
            z22: self.z22.clone(),
            data: self.nonclassical()?,
        })
    }
}

fn coefficients(spec: &CoefficientSpec, domain: Domain) -> Result<Coefficients> {
    let f = |name: &str, s: &Option<FieldSpec>| match s {
        Some(s) => s.field2d(name, domain),
        None => Ok(Field2D::zero()),
    };
    Ok(Coefficients::new(
        f("a21", &spec.a21)?,
        f("a12", &spec.a12)?,
        f("a20", &spec.a20)?,
        f("a02", &spec.a02)?,
        f("a11", &spec.a11)?,
        f("a10", &spec.a10)?,
        f("a01", &spec.a01)?,
        f("a00", &spec.a00)?,
    )?)
}

fn input(spec: &DataSpec, base: &Path, domain: Domain) -> Result<Input> {
    let present = [
        spec.nonclassical.is_some(),
        spec.classical.is_some(),
        spec.file.is_some(),
    ];
    if present.iter().filter(|&&p| p).count() != 1 {
        return Err(CliError::Config(
            "exactly one of [data.nonclassical], [data.classical] or data.file is required".into(),
        ));
    }
    if let Some(n) = &spec.nonclassical {
        let mut sources = BTreeMap::new();
        let mut func = |name: &'static str, v: &Value, var: Var| -> Result<Field1D> {
            if let Some(s) = v.source() {
                sources.insert(name, s);
            }
            v.field1d(name, var)
        };
        let data = NonclassicalData {
            z20: func("z20", &n.z20, Var::X)?,
            z02: func("z02", &n.z02, Var::Y)?,
            z02_h1: func("z02_h1", &n.z02_h1, Var::Y)?,
            z20_h2: func("z20_h2", &n.z20_h2, Var::X)?,
            z00: n.z00.constant("z00")?,
            z10: n.z10.constant("z10")?,
            z01: n.z01.constant("z01")?,
            z00_h1: n.z00_h1.constant("z00_h1")?,
            z01_h1: n.z01_h1.constant("z01_h1")?,
            z00_h2: n.z00_h2.constant("z00_h2")?,
            z10_h2: n.z10_h2.constant("z10_h2")?,
        };
        return Ok(Input::Nonclassical { data, sources });
    }
    if let Some(c) = &spec.classical {
        let mut sources = BTreeMap::new();
        let mut func = |name: &'static str, v: &Value, var: Var| -> Result<Field1D> {
            if let Some(s) = v.source() {
                sources.insert(name, s);
            }
            v.field1d(name, var)
        };
        let data = ClassicalData {
            phi1: func("phi1", &c.phi1, Var::Y)?,
            phi2: func("phi2", &c.phi2, Var::Y)?,
            psi1: func("psi1", &c.psi1, Var::X)?,
            psi2: func("psi2", &c.psi2, Var::X)?,
        };
        return Ok(Input::Classical { data, sources });
    }
    let file = spec.file.as_ref().expect("counted above");
    let path = base.join(file);
    DataFile::read(&path)?.into_input(domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> Result<Setup> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Setup::resolve(&cfg, Path::new("."), &Overrides::default())
    }

    const BASE: &str = "[domain]\nh1 = 1.0\nh2 = 2.0\n[grid]\nn1 = 5\nn2 = 6\n";

    #[test]
    fn minimal_config() {
        let s = cfg(&format!("{BASE}[data.nonclassical]\n")).unwrap();
        assert!(s.coeffs.all_zero());
        assert_eq!((s.grid.n1(), s.grid.n2()), (5, 6));
        assert_eq!(s.opts.method, Method::Auto);
        assert_eq!(s.opts.norm, NormSpec::L2);
    }

    #[test]
    fn expressions_and_piecewise() {
        let s = cfg(&format!(
            "{BASE}[coefficients]\na00 = \"1 + x*y\"\na11 = {{ piecewise = [\
             {{ x = [0.0, 0.3], y = [0.0, 2.0], value = 1.0 }},\
             {{ x = [0.3, 1.0], y = [0.0, 2.0], value = \"2*y\" }}] }}\n\
             [rhs]\nz22 = \"sin(x)\"\n[data.nonclassical]\nz10 = \"pi/2\"\nz20 = \"x^2\"\n\
             [solver]\np = \"inf\"\nmethod = \"dense\"\n"
        ))
        .unwrap();
        assert_eq!(s.coeffs.at(0.5, 1.0).a00, 1.5);
        assert_eq!(s.coeffs.at(0.2, 1.0).a11, 1.0);
        assert_eq!(s.coeffs.at(0.5, 1.5).a11, 3.0);
        assert!(s.grid.x().index_of(0.3).is_some(), "jump placed on a node");
        assert!(s.opts.norm.is_infinite());
        assert_eq!(s.opts.method, Method::Dense);
        let z = s.nonclassical().unwrap();
        assert_eq!(z.z10, std::f64::consts::FRAC_PI_2);
        assert_eq!(z.z20.eval(0.5), 0.25);
    }

    #[test]
    fn rejects_bad_configs() {
        let two = format!("{BASE}[data.nonclassical]\n[data.classical]\n");
        assert!(matches!(cfg(&two), Err(CliError::Config(_))));
        let var = format!("{BASE}[data.nonclassical]\nz20 = \"y\"\n");
        assert!(matches!(cfg(&var), Err(CliError::Config(_))));
        let scalar = format!("{BASE}[data.nonclassical]\nz00 = \"x\"\n");
        assert!(matches!(cfg(&scalar), Err(CliError::Config(_))));
        let syntax = format!("{BASE}[rhs]\nz22 = \"1 +\"\n[data.nonclassical]\n");
        assert!(matches!(cfg(&syntax), Err(CliError::Config(_))));
        let unknown = format!("{BASE}[data.nonclassical]\nz99 = 1.0\n");
        assert!(matches!(cfg(&unknown), Err(CliError::Config(_))));
    }

    #[test]
    fn classical_corner_mismatch_is_a_data_error() {
        let s = cfg(&format!(
            "{BASE}[data.classical]\nphi1 = \"1 + y\"\npsi1 = \"x\"\n"
        ))
        .unwrap();
        assert!(matches!(s.problem(), Err(CliError::Data(_))));
    }

    #[test]
    fn grid_and_p_flags() {
        assert_eq!(parse_grid("33x17").unwrap(), (33, 17));
        assert_eq!(parse_grid("9").unwrap(), (9, 9));
        assert!(parse_grid("9y9").is_err());
        assert!(parse_p("inf").unwrap().is_infinite());
        assert_eq!(parse_p("1.5").unwrap().p(), 1.5);
        assert!(parse_p("0.5").is_err());
    }
}
