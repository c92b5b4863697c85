use std::sync::Arc;

use mangeron::fields::{
    build_grid, Domain, Field1D, Field2D, Grid2D, GridFn1D, GridFn2D, NormSpec,
};
use mangeron::mms::{
    convergence_study, make_mms, named_case, random_problem, smooth_coefficients, Discretization,
    ExactSolution, Profile, Separable,
};
use mangeron::problem::{quadrature_error_estimate, Coefficients, NonclassicalData, PdeProblem};
use mangeron::reduction::{assemble_coupled, assemble_eliminated, Representation};
use mangeron::solver::{
    assemble_solution, estimate_m1, reconstruct_lower, residual_report, solve, solve_coupled,
    solve_dense, solve_neumann, Method, ReducedUnknowns, SolutionBundle, SolveOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(d: Domain, n: usize) -> Arc<Grid2D> {
    Arc::new(build_grid(d, n, n, &[], &[]).unwrap())
}

fn a11(c: f64) -> Coefficients {
    Coefficients {
        a11: Field2D::constant(c),
        ..Coefficients::zero()
    }
}

fn poly(c: &[f64]) -> Profile {
    Profile::Poly(c.to_vec())
}

/// Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

#[test]
fn neumann_with_zero_kernel_stops_after_one_step() {
    let d = Domain::unit();
    let p = random_problem(1, &Coefficients::zero(), d);
    let op = assemble_eliminated(&p, &grid(d, 9), Representation::MatrixFree).unwrap();
    let (b, rep) = solve_neumann(&op, 1e-12, 50);
    assert!(rep.converged);
    assert_eq!(rep.iterations, 1);
    assert_eq!(b.values(), op.rhs().values());
}

#[test]
fn neumann_small_a11_matches_dense_with_geometric_decrease() {
    let d = Domain::unit();
    let p = random_problem(2, &a11(0.1), d);
    let g = grid(d, 17);
    let op = assemble_eliminated(&p, &g, Representation::Dense).unwrap();
    let (it, rep) = solve_neumann(&op, 1e-12, 100);
    assert!(rep.converged && !rep.diverged);
    assert!(rep.final_ratio.unwrap() < 1.0);
    assert!(rep.update_norms.windows(2).all(|w| w[1] < w[0]));
    let (lu, _) = solve_dense(&op).unwrap();
    assert!(it.max_abs_diff(&lu) < 1e-9);
}

#[test]
fn large_a11_diverges_and_spectral_radius_exceeds_one() {
    let d = Domain::unit();
    let p = random_problem(3, &a11(50.0), d);
    let g = grid(d, 13);
    let op = assemble_eliminated(&p, &g, Representation::MatrixFree).unwrap();
    let (_, rep) = solve_neumann(&op, 1e-10, 200);
    assert!(rep.diverged && !rep.converged);

    // power iteration on K
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut v = GridFn2D::from_fn(g.clone(), |_, _| rng.gen_range(-1.0..1.0));
    let mut rho = 0.0;
    for _ in 0..60 {
        let w = op.apply_k(&v);
        rho = w.sup_norm() / v.sup_norm();
        let s = w.sup_norm();
        v = w.map(|x| x / s);
    }
    assert!(rho > 1.0, "spectral radius estimate {rho}");
}

#[test]
fn dense_identity_returns_rhs() {
    let d = Domain::new(1.4, 0.6).unwrap();
    let p = random_problem(4, &Coefficients::zero(), d);
    let op = assemble_eliminated(&p, &grid(d, 7), Representation::Dense).unwrap();
    let (b, cond) = solve_dense(&op).unwrap();
    assert!(b.max_abs_diff(op.rhs()) < 1e-15);
    assert!((cond - 1.0).abs() < 1e-12);
}

#[test]
fn dense_three_by_three_matches_hand_elimination() {
    let d = Domain::unit();
    let p = random_problem(5, &a11(0.7), d);
    let op = assemble_eliminated(&p, &grid(d, 3), Representation::Dense).unwrap();
    let m = op.dense().unwrap();
    let rows: Vec<Vec<f64>> = (0..9)
        .map(|r| (0..9).map(|c| m[(r, c)]).collect())
        .collect();
    let hand = gauss(rows, op.rhs().values().to_vec());
    let (b, _) = solve_dense(&op).unwrap();
    for (a, h) in b.values().iter().zip(&hand) {
        assert!((a - h).abs() < 1e-12);
    }
}

#[test]
fn biquadratic_from_constant_fourth_derivative() {
    let u: Arc<dyn ExactSolution> = Arc::new(Separable::single(
        poly(&[0.0, 0.0, 1.0]),
        poly(&[0.0, 0.0, 1.0]),
    ));
    let case = make_mms("x2y2", u.clone(), Coefficients::zero(), Domain::unit());
    let g = grid(Domain::unit(), 21);
    let b22 = GridFn2D::from_fn(g.clone(), |_, _| 4.0);
    let h = reconstruct_lower(&case.problem.data, &b22);
    let b = assemble_solution(&case.problem.data, &h);
    assert!(b.uxxyy.values().iter().all(|&v| v == 4.0));
    let exact = GridFn2D::from_fn(g, |x, y| u.value(x, y));
    assert!(b.u.max_abs_diff(&exact) <= 5e-3);
}

#[test]
fn coupled_reproduces_constant_b22_with_a11() {
    // u* = xy + x^2 y^2: u_xxyy = 4
    let u: Arc<dyn ExactSolution> = Arc::new(Separable::new(vec![
        (1.0, poly(&[0.0, 1.0]), poly(&[0.0, 1.0])),
        (1.0, poly(&[0.0, 0.0, 1.0]), poly(&[0.0, 0.0, 1.0])),
    ]));
    let case = make_mms("xy+x2y2", u, a11(1.0), Domain::unit());
    let g = grid(Domain::unit(), 11);
    let (h, _) = solve_coupled(assemble_coupled(&case.problem, &g).unwrap()).unwrap();
    assert!(h.b22.values().iter().all(|v| (v - 4.0).abs() < 1e-9));
    assert!((h.b11 - 1.0).abs() < 1e-9);
}

#[test]
fn residuals_vanish_for_exact_polynomial_case() {
    let case = named_case("biquadratic-zero").unwrap();
    let g = case.grid(13).unwrap();
    let sol = solve(&case.problem, &g, &SolveOptions::default()).unwrap();
    let r = &sol.report.residuals;
    assert!(
        r.pde <= 1e-9 && r.max_bc() <= 1e-9 && r.representation <= 1e-9,
        "{r:?}"
    );
    assert!(sol.report.passed);
}

/// Traces of a bundle as sampled nonclassical data.
fn data_from_bundle(b: &SolutionBundle) -> NonclassicalData {
    let g = b.grid();
    let (xs, ys) = (g.x().nodes().to_vec(), g.y().nodes().to_vec());
    let (li, lj) = (g.n1() - 1, g.n2() - 1);
    let fx = |v: Vec<f64>| Field1D::samples(xs.clone(), v).unwrap();
    let fy = |v: Vec<f64>| Field1D::samples(ys.clone(), v).unwrap();
    NonclassicalData {
        z00: b.u.at(0, 0),
        z10: b.ux.at(0, 0),
        z01: b.uy.at(0, 0),
        z20: fx(b.uxx.row(0).to_vec()),
        z02: fy(b.uyy.column(0)),
        z00_h1: b.u.at(li, 0),
        z01_h1: b.uy.at(li, 0),
        z02_h1: fy(b.uyy.column(li)),
        z00_h2: b.u.at(0, lj),
        z10_h2: b.ux.at(0, lj),
        z20_h2: fx(b.uxx.row(lj).to_vec()),
    }
}

#[test]
fn forward_constructed_data_meet_boundary_conditions() {
    let d = Domain::new(1.3, 0.8).unwrap();
    let g = grid(d, 15);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let seed = random_problem(12, &Coefficients::zero(), d);
    let mut s = || rng.gen_range(-1.0..1.0);
    let (c1, c2, c3, c4): (f64, f64, f64, f64) = (s(), s(), s(), s());
    let h = ReducedUnknowns {
        b11: s(),
        b21: GridFn1D::from_fn(g.x().clone(), |x| c1 * (2.0 * x).sin()),
        b12: GridFn1D::from_fn(g.y().clone(), |y| c2 * y * y),
        b22: GridFn2D::from_fn(g.clone(), |x, y| c3 + c4 * (x - y).cos()),
    };
    let bundle = assemble_solution(&seed.data, &h);
    let data = data_from_bundle(&bundle);
    let p = PdeProblem { data, ..seed };
    let r = residual_report(&p, &bundle, NormSpec::L2, 0.0);
    let quad = quadrature_error_estimate(&p.data, &g);
    assert!(r.max_bc() <= quad.max(1e-14), "{} vs {quad}", r.max_bc());
}

#[test]
fn corrupted_node_flags_equation_residual() {
    let case = named_case("trigonometric").unwrap();
    let g = case.grid(17).unwrap();
    let opts = SolveOptions::default();
    let sol = solve(&case.problem, &g, &opts).unwrap();
    let before = sol.report.residuals.pde;
    let mut b = sol.bundle.clone();
    b.u.values_mut()[g.idx(7, 9)] += 1.0;
    let r = residual_report(&case.problem, &b, opts.norm, opts.tol);
    assert!(!r.passed && r.pde > before && r.pde > r.pde_threshold);
}

#[test]
fn fourth_derivative_equals_solved_b22() {
    let p = random_problem(13, &smooth_coefficients(14, 0.4), Domain::unit());
    let g = grid(Domain::unit(), 9);
    for method in [Method::Neumann, Method::Dense, Method::Coupled] {
        let opts = SolveOptions {
            method,
            ..SolveOptions::default()
        };
        let sol = solve(&p, &g, &opts).unwrap();
        assert_eq!(sol.bundle.uxxyy.values(), sol.unknowns.b22.values());
    }
}

#[test]
fn single_trial_m1_matches_solve() {
    let d = Domain::unit();
    let coeffs = smooth_coefficients(15, 0.3);
    let g = grid(d, 9);
    let opts = SolveOptions::default();
    let p = random_problem(16, &coeffs, d);
    let est = estimate_m1(|_| p.clone(), &g, 1, &opts);
    let direct = solve(&p, &g, &opts).unwrap().report.m1_estimate;
    assert_eq!(est.ratios, vec![direct]);
    assert_eq!(est.max, est.min);
}

#[test]
fn zero_coefficient_m1_is_stable() {
    let d = Domain::unit();
    let g = grid(d, 9);
    let est = estimate_m1(
        |t| random_problem(500 + t as u64, &Coefficients::zero(), d),
        &g,
        50,
        &SolveOptions::default(),
    );
    assert_eq!(est.ratios.len(), 50);
    assert!(est.excluded.is_empty());
    assert!(est.max.is_finite() && est.max / est.min < 10.0);
}

#[test]
fn rejected_data_report_the_failing_relation() {
    let mut p = named_case("trigonometric").unwrap().problem;
    p.data.z00_h1 += 0.1;
    let g = grid(Domain::unit(), 9);
    match solve(&p, &g, &SolveOptions::default()) {
        Err(mangeron::Error::DataConstraints(rep)) => {
            assert!(rep.failures().any(|r| r.name == "u(h1,0)"));
        }
        other => panic!("expected a constraint failure, got {other:?}"),
    }
    let forced = SolveOptions {
        force: true,
        ..SolveOptions::default()
    };
    let r = solve(&p, &g, &forced).unwrap().report;
    assert!(!r.constraints.passed);
}

#[test]
fn smooth_cases_converge_at_second_order() {
    let method = Discretization::IntegralEquation(SolveOptions::default());
    for name in ["trigonometric", "smooth-variable"] {
        let t = convergence_study(&named_case(name).unwrap(), &[9, 17, 33], &method).unwrap();
        assert!(t.monotone, "{name}");
        assert!(t.min_order().unwrap() >= 1.9, "{name}: {:?}", t.rows);
    }
}

#[test]
fn piecewise_case_records_orders() {
    let method = Discretization::IntegralEquation(SolveOptions::default());
    let t =
        convergence_study(&named_case("piecewise-a00").unwrap(), &[9, 17, 33], &method).unwrap();
    assert!(t.min_order().unwrap() >= 1.5, "{:?}", t.rows);
}

#[test]
fn exact_case_flagged() {
    let method = Discretization::IntegralEquation(SolveOptions::default());
    let t = convergence_study(&named_case("bilinear").unwrap(), &[5, 9, 17], &method).unwrap();
    assert!(t.exact);
    assert!(convergence_study(&named_case("bilinear").unwrap(), &[5, 9], &method).is_err());
}

#[test]
fn fd_oracle_exact_for_biquadratic() {
    // the three-point stencils differentiate quadratics exactly, so the
    // oracle has no discretization error to measure here
    let method = Discretization::FiniteDifference;
    let t = convergence_study(
        &named_case("biquadratic-zero").unwrap(),
        &[9, 17, 33],
        &method,
    )
    .unwrap();
    assert!(t.rows.iter().all(|r| r.sup_error < 1e-11), "{:?}", t.rows);
}
