//! Browser bindings. Every export returns a JSON string; failures come back
//! as `{"error": "..."}`.

use std::sync::Arc;

use mangeron::fields::{Domain, Field2D};
use mangeron::mms::{
    convergence_study, make_mms, named_case, sup_error, Discretization, Profile, Separable,
};
use mangeron::problem::Coefficients;
use mangeron::solver::{solve, Method, SolveOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_N: usize = 65;

#[derive(Serialize)]
struct Failure {
    error: String,
}

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    let out = match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    };
    out.unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

fn check_n(n: usize) -> Result<(), String> {
    if (3..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("grid size must be between 3 and {MAX_N}"))
    }
}

#[derive(Serialize)]
struct SolveView {
    n: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    /// Row-major with `y` outer.
    u: Vec<f64>,
    error: Vec<f64>,
    sup_error: f64,
    method: String,
    iterations: usize,
    passed: bool,
    warning: Option<String>,
    m1_estimate: f64,
}

fn solve_view(case: &str, n: usize, method: &str) -> Result<SolveView, String> {
    check_n(n)?;
    let case = named_case(case).map_err(|e| e.to_string())?;
    let opts = SolveOptions {
        method: method.parse::<Method>().map_err(|e| e.to_string())?,
        ..SolveOptions::default()
    };
    let grid = case.grid(n).map_err(|e| e.to_string())?;
    let sol = solve(&case.problem, &grid, &opts).map_err(|e| e.to_string())?;
    let u = &sol.bundle.u;
    let error = u
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let (i, j) = (k % grid.n1(), k / grid.n1());
            v - case.u_star.value(grid.x().nodes()[i], grid.y().nodes()[j])
        })
        .collect();
    Ok(SolveView {
        n,
        x: grid.x().nodes().to_vec(),
        y: grid.y().nodes().to_vec(),
        u: u.values().to_vec(),
        error,
        sup_error: sup_error(&case, u),
        method: sol.report.method.to_string(),
        iterations: sol.report.iterations,
        passed: sol.report.passed,
        warning: sol.report.warning.clone(),
        m1_estimate: sol.report.m1_estimate,
    })
}

/// Solves a manufactured case on an `n x n` grid.
#[wasm_bindgen]
pub fn solve_case(case: &str, n: usize, method: &str) -> String {
    respond(solve_view(case, n, method))
}

fn parse_sizes(sizes: &str) -> Result<Vec<usize>, String> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad grid size {s:?}"))
        })
        .collect::<Result<_, _>>()?;
    sizes.iter().try_for_each(|&n| check_n(n))?;
    Ok(sizes)
}

/// Convergence table for a case; `sizes` is a comma-separated list.
#[wasm_bindgen]
pub fn convergence(case: &str, sizes: &str) -> String {
    respond((|| {
        let sizes = parse_sizes(sizes)?;
        let case = named_case(case).map_err(|e| e.to_string())?;
        let method = Discretization::IntegralEquation(SolveOptions::default());
        convergence_study(&case, &sizes, &method).map_err(|e| e.to_string())
    })())
}

#[derive(Serialize)]
struct History {
    a11: f64,
    update_norms: Vec<f64>,
    converged: bool,
    diverged: bool,
    method: String,
    warning: Option<String>,
    sup_error: f64,
}

fn history(a11: f64, n: usize) -> Result<History, String> {
    check_n(n)?;
    if !a11.is_finite() {
        return Err("a11 must be finite".into());
    }
    let sin = Profile::Sin {
        freq: 1.0,
        phase: 0.0,
    };
    let coeffs = Coefficients {
        a11: Field2D::constant(a11),
        ..Coefficients::zero()
    };
    let case = make_mms(
        "sin-sin",
        Arc::new(Separable::single(sin.clone(), sin)),
        coeffs,
        Domain::unit(),
    );
    let grid = case.grid(n).map_err(|e| e.to_string())?;
    let sol = solve(&case.problem, &grid, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let it = sol
        .report
        .neumann
        .clone()
        .ok_or("the iteration did not run")?;
    Ok(History {
        a11,
        update_norms: it.update_norms,
        converged: it.converged,
        diverged: it.diverged,
        method: sol.report.method.to_string(),
        warning: sol.report.warning.clone(),
        sup_error: sup_error(&case, &sol.bundle.u),
    })
}

/// Update norms of the successive approximations for `u = sin x sin y` with
/// a constant `a11` and every other coefficient zero.
#[wasm_bindgen]
pub fn neumann_history(a11: f64, n: usize) -> String {
    respond(history(a11, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn solve_case_returns_grid_and_error() {
        let v = parse(solve_case("biquadratic", 9, "auto"));
        assert_eq!(v["u"].as_array().unwrap().len(), 81);
        assert!(v["sup_error"].as_f64().unwrap() < 1e-12);
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn bad_input_is_an_error_object() {
        assert!(parse(solve_case("nope", 9, "auto"))["error"].is_string());
        assert!(parse(solve_case("trigonometric", 500, "auto"))["error"].is_string());
        assert!(parse(convergence("trigonometric", "9,x"))["error"].is_string());
        assert!(parse(neumann_history(f64::NAN, 9))["error"].is_string());
    }

    #[test]
    fn convergence_table_rows() {
        let v = parse(convergence("trigonometric", "9, 17, 33"));
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[2]["order"].as_f64().unwrap() > 1.9);
    }

    #[test]
    fn history_shows_divergence_for_large_a11() {
        let small = parse(neumann_history(0.1, 9));
        assert_eq!(small["converged"], true);
        let large = parse(neumann_history(50.0, 9));
        assert_eq!(large["diverged"], true);
        assert_eq!(large["method"], "dense");
        assert!(large["sup_error"].as_f64().unwrap() < 1e-2);
    }
}
