use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mangeron::fields::{GridFn2D, NormSpec};
use mangeron::mms::{convergence_study, named_case, ConvergenceTable, Discretization};
use mangeron::problem::{
    check_data_constraints, check_matching, classical_to_nonclassical,
    default_constraint_tolerance, nonclassical_to_classical_accurate, quadrature_error_estimate,
    CheckReport,
};
use mangeron::solver::{solve, SolveOptions, SolveReport};
use mangeron::Error as CoreError;
use serde::Serialize;

use crate::config::{Input, Overrides, Setup};
use crate::datafile::{DataFile, DataKind};
use crate::error::{CliError, Exit, Result};
use crate::output::{solution_csv, write_json, write_text};

/// Exit status plus a human-readable summary for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub exit: Exit,
    pub summary: String,
}

#[derive(Debug, Serialize)]
struct GridInfo {
    h1: f64,
    h2: f64,
    n1: usize,
    n2: usize,
    /// `"inf"` or the exponent.
    p: String,
}

#[derive(Debug, Serialize)]
struct SolveOutput<'a> {
    status: &'static str,
    grid: GridInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_sup_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraints: Option<&'a CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a SolveReport>,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn grid_info(setup: &Setup) -> GridInfo {
    GridInfo {
        h1: setup.domain.h1(),
        h2: setup.domain.h2(),
        n1: setup.grid.n1(),
        n2: setup.grid.n2(),
        p: setup.opts.norm.to_string(),
    }
}

/// `solve`: writes `solution.csv` and `report.json` into `out`.
pub fn cmd_solve(config: &Path, out: &Path, overrides: &Overrides) -> Result<Outcome> {
    let setup = Setup::load(config, overrides)?;
    let problem = setup.problem()?;
    ensure_dir(out)?;
    let report_path = out.join("report.json");
    let sol = match solve(&problem, &setup.grid, &setup.opts) {
        Ok(sol) => sol,
        Err(CoreError::DataConstraints(rep)) => {
            write_json(
                &report_path,
                &SolveOutput {
                    status: "rejected",
                    grid: grid_info(&setup),
                    error: Some("data violate the admissibility constraints".into()),
                    exact_sup_error: None,
                    constraints: Some(&rep),
                    report: None,
                },
            )?;
            return Ok(Outcome {
                exit: Exit::Data,
                summary: format!(
                    "data rejected (use --force to solve anyway):\n{rep}\nreport: {}",
                    report_path.display()
                ),
            });
        }
        Err(e) => {
            let err = CliError::from(e);
            write_json(
                &report_path,
                &SolveOutput {
                    status: "failed",
                    grid: grid_info(&setup),
                    error: Some(err.to_string()),
                    exact_sup_error: None,
                    constraints: None,
                    report: None,
                },
            )?;
            return Err(err);
        }
    };

    let exact_sup_error = setup.exact.as_ref().map(|u| {
        let exact = GridFn2D::from_fn(setup.grid.clone(), |x, y| u.eval(x, y));
        sol.bundle.u.max_abs_diff(&exact)
    });
    let r = &sol.report;
    write_text(&out.join("solution.csv"), &solution_csv(&sol.bundle))?;
    write_json(
        &report_path,
        &SolveOutput {
            status: if r.passed {
                "ok"
            } else {
                "residual-check-failed"
            },
            grid: grid_info(&setup),
            error: None,
            exact_sup_error,
            constraints: None,
            report: Some(r),
        },
    )?;

    let mut s = String::new();
    let _ = writeln!(s, "method       {}", r.method);
    if let Some(w) = &r.warning {
        let _ = writeln!(s, "warning      {w}");
    }
    if r.iterations > 0 {
        let _ = writeln!(s, "iterations   {}", r.iterations);
    }
    let res = &r.residuals;
    let _ = writeln!(
        s,
        "pde residual {:.3e} (threshold {:.3e})",
        res.pde, res.pde_threshold
    );
    let _ = writeln!(
        s,
        "bc residual  {:.3e} (threshold {:.3e})",
        res.max_bc(),
        res.bc_threshold
    );
    let _ = writeln!(
        s,
        "b11 routes   {:.3e} apart (threshold {:.3e})",
        r.b11_alt_discrepancy, r.b11_threshold
    );
    let _ = writeln!(s, "m1 estimate  {:.6e}", r.m1_estimate);
    if let Some(e) = exact_sup_error {
        let _ = writeln!(s, "sup error    {e:.3e}");
    }
    let _ = write!(
        s,
        "wrote {} and {}",
        out.join("solution.csv").display(),
        report_path.display()
    );
    Ok(Outcome {
        exit: if r.passed { Exit::Ok } else { Exit::Solver },
        summary: s,
    })
}

/// `convert`: writes `classical.json` or `nonclassical.json` into `out`.
pub fn cmd_convert(
    config: &Path,
    out: &Path,
    to: Option<DataKind>,
    overrides: &Overrides,
) -> Result<Outcome> {
    let setup = Setup::load(config, overrides)?;
    let from = setup.input.kind();
    let target = to.unwrap_or(match from {
        DataKind::Classical => DataKind::Nonclassical,
        DataKind::Nonclassical => DataKind::Classical,
    });
    if target == from {
        return Err(CliError::Config(format!("data are already {from}")));
    }
    let file = match &setup.input {
        Input::Nonclassical { data, .. } => {
            let cd = nonclassical_to_classical_accurate(data, &setup.grid);
            DataFile::classical(&cd, &setup.grid, &BTreeMap::new())
        }
        Input::Classical { data, sources } => {
            let z = classical_to_nonclassical(data, &setup.grid, data.corner_tolerance())?;
            DataFile::nonclassical(&z, &setup.grid, &derived_sources(sources))
        }
    };
    ensure_dir(out)?;
    let path = out.join(format!("{target}.json"));
    write_json(&path, &file)?;
    Ok(Outcome {
        exit: Exit::Ok,
        summary: format!("converted {from} data to {target}: {}", path.display()),
    })
}

/// Expressions for the nonclassical functions when the classical traces came
/// from expressions: the symbolic second derivatives.
fn derived_sources(sources: &BTreeMap<&'static str, String>) -> BTreeMap<&'static str, String> {
    use mangeron::expr::{Expr, Var};
    let pairs = [
        ("z20", "psi1", Var::X),
        ("z02", "phi1", Var::Y),
        ("z02_h1", "phi2", Var::Y),
        ("z20_h2", "psi2", Var::X),
    ];
    let mut out = BTreeMap::new();
    for (target, source, var) in pairs {
        let Some(src) = sources.get(source) else {
            continue;
        };
        let second = Expr::parse(src)
            .and_then(|e| e.derivative(var))
            .and_then(|e| e.derivative(var));
        if let Ok(e) = second {
            out.insert(target, e.to_string());
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct CheckOutput {
    passed: bool,
    matching: CheckReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    constraints: Option<CheckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

/// `check`: corner matching of the classical form and the admissibility
/// constraints of the nonclassical form.
pub fn cmd_check(config: &Path, out: Option<&Path>, overrides: &Overrides) -> Result<Outcome> {
    let setup = Setup::load(config, overrides)?;
    let (domain, grid) = (setup.domain, &setup.grid);
    let output = match &setup.input {
        Input::Nonclassical { data, .. } => {
            let constraints =
                check_data_constraints(data, domain, default_constraint_tolerance(data, grid));
            // the grid rule is used here, so allow its error
            let tol =
                10.0 * quadrature_error_estimate(data, grid) + 1e-12 * (1.0 + data.scale(grid));
            let cd = mangeron::problem::nonclassical_to_classical(data, grid);
            let matching = check_matching(&cd, domain, tol);
            CheckOutput {
                passed: constraints.passed && matching.passed,
                matching,
                constraints: Some(constraints),
                note: None,
            }
        }
        Input::Classical { data, .. } => {
            let matching = check_matching(data, domain, data.corner_tolerance());
            let z = classical_to_nonclassical(data, grid, f64::INFINITY)?;
            let constraints =
                check_data_constraints(&z, domain, default_constraint_tolerance(&z, grid));
            let note = (!data.is_analytic()).then(|| {
                "sampled traces were differenced on the grid; constraint residuals include that error"
                    .to_string()
            });
            CheckOutput {
                passed: matching.passed && constraints.passed,
                matching,
                constraints: Some(constraints),
                note,
            }
        }
    };
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_json(&dir.join("check.json"), &output)?;
    }
    let mut s = format!("corner matching:\n{}\n", output.matching);
    if let Some(c) = &output.constraints {
        let _ = writeln!(s, "data constraints:\n{c}");
    }
    if let Some(n) = &output.note {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = write!(
        s,
        "{}",
        if output.passed {
            "all checks passed"
        } else {
            "checks FAILED"
        }
    );
    Ok(Outcome {
        exit: if output.passed { Exit::Ok } else { Exit::Data },
        summary: s,
    })
}

/// A named verification suite.
#[derive(Debug, Clone, Copy)]
pub struct Suite {
    pub name: &'static str,
    pub cases: &'static [&'static str],
    pub sizes: &'static [usize],
    pub criterion: SuiteCriterion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuiteCriterion {
    /// Errors fall monotonically with every observed order at least this.
    MinOrder(f64),
    /// Every error at round-off level.
    Exact,
    /// Record only.
    Completes,
}

pub const SUITES: [Suite; 3] = [
    Suite {
        name: "smooth-basic",
        cases: &["trigonometric", "smooth-variable"],
        sizes: &[9, 17, 33],
        criterion: SuiteCriterion::MinOrder(1.9),
    },
    Suite {
        name: "exact-bilinear",
        cases: &["bilinear", "biquadratic-zero"],
        sizes: &[5, 9, 17],
        criterion: SuiteCriterion::Exact,
    },
    Suite {
        name: "piecewise-a00",
        cases: &["piecewise-a00"],
        sizes: &[9, 17, 33],
        criterion: SuiteCriterion::Completes,
    },
];

pub fn suite(name: &str) -> Result<Suite> {
    SUITES
        .iter()
        .copied()
        .find(|s| s.name == name)
        .ok_or_else(|| {
            let names: Vec<_> = SUITES.iter().map(|s| s.name).collect();
            CliError::Config(format!(
                "unknown suite {name:?}; available: {}",
                names.join(", ")
            ))
        })
}

#[derive(Debug, Serialize)]
struct VerifyOutput {
    suite: String,
    passed: bool,
    tables: Vec<CaseResult>,
}

#[derive(Debug, Serialize)]
struct CaseResult {
    passed: bool,
    table: ConvergenceTable,
}

/// `verify`: convergence tables against the manufactured solutions.
pub fn cmd_verify(name: &str, out: Option<&Path>, norm: Option<NormSpec>) -> Result<Outcome> {
    let suite = suite(name)?;
    let opts = SolveOptions {
        norm: norm.unwrap_or_default(),
        ..SolveOptions::default()
    };
    let method = Discretization::IntegralEquation(opts);
    let mut tables = Vec::new();
    for case_name in suite.cases {
        let case = named_case(case_name)?;
        let table = convergence_study(&case, suite.sizes, &method)?;
        let passed = match suite.criterion {
            SuiteCriterion::MinOrder(k) => {
                table.monotone && table.min_order().is_some_and(|o| o >= k)
            }
            SuiteCriterion::Exact => table.exact,
            SuiteCriterion::Completes => true,
        };
        tables.push(CaseResult { passed, table });
    }
    let passed = tables.iter().all(|t| t.passed);
    let mut s = String::new();
    for t in &tables {
        let _ = writeln!(
            s,
            "{} [{}]",
            t.table.case,
            if t.passed { "pass" } else { "FAIL" }
        );
        let _ = writeln!(s, "  {:>4}  {:>12}  {:>8}", "n", "sup error", "order");
        for r in &t.table.rows {
            let order = match (r.order, t.table.exact) {
                (_, true) => "exact".to_string(),
                (Some(o), _) => format!("{o:.3}"),
                (None, _) => "-".to_string(),
            };
            let _ = writeln!(s, "  {:>4}  {:>12.4e}  {:>8}", r.n, r.sup_error, order);
        }
    }
    if let Some(dir) = out {
        ensure_dir(dir)?;
        for t in &tables {
            let path: PathBuf = dir.join(format!("verify_{}_{}.csv", suite.name, t.table.case));
            write_text(&path, &t.table.to_csv())?;
        }
        let output = VerifyOutput {
            suite: suite.name.to_string(),
            passed,
            tables,
        };
        write_json(&dir.join(format!("verify_{}.json", suite.name)), &output)?;
    }
    let _ = write!(
        s,
        "suite {}: {}",
        suite.name,
        if passed { "passed" } else { "FAILED" }
    );
    Ok(Outcome {
        exit: if passed { Exit::Ok } else { Exit::Solver },
        summary: s,
    })
}
