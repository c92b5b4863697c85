use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mangeron"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn solve(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const UNIT: &str = "[domain]\nh1 = 1.0\nh2 = 1.0\n[grid]\nn1 = 9\nn2 = 9\n";

#[test]
fn zero_config_gives_zero_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(&bundled("zero.toml"), dir.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("x,y,u,ux,uy,uxx,uyy,uxy,uxxy,uxyy,uxxyy")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 121);
    for row in &rows {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols.len(), 11);
        assert!(cols[2..].iter().all(|&v| v == 0.0));
    }
    // y-outer order
    let second: Vec<f64> = rows[1]
        .split(',')
        .take(2)
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(second, vec![0.1, 0.0]);
    assert!(!csv.contains('\r'));
}

#[test]
fn biquadratic_golden_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(&bundled("biquadratic.toml"), dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["status"], "ok");
    assert!(r["exact_sup_error"].as_f64().unwrap() <= 5e-3);
    assert_eq!(r["grid"]["n1"], 21);
    let rep = &r["report"];
    for key in [
        "b11_alt_discrepancy",
        "m1_estimate",
        "solution_norm",
        "data_norm",
        "rhs_norm",
    ] {
        assert!(rep[key].is_f64(), "{key}");
    }
    assert_eq!(rep["residuals"]["bc"].as_array().unwrap().len(), 11);
    assert_eq!(rep["constraints"]["residuals"].as_array().unwrap().len(), 3);
}

#[test]
fn floats_printed_with_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    solve(&bundled("biquadratic.toml"), dir.path(), &[]);
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(json.contains("\"h1\": 1.0000000000000000e0"));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let cell = csv.lines().nth(2).unwrap().split(',').next().unwrap();
    assert_eq!(cell, "5.0000000000000003e-2");
}

#[test]
fn constraint_violation_exits_3_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(&bundled("biquadratic-bad-corner.toml"), dir.path(), &[]);
    assert_eq!(code(&o), 3);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["status"], "rejected");
    let failing: Vec<&Value> = r["constraints"]["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["value"].as_f64().unwrap() > r["constraints"]["tolerance"].as_f64().unwrap())
        .collect();
    assert_eq!(failing.len(), 1);
    assert_eq!(failing[0]["name"], "u(h1,0)");
    assert!(!dir.path().join("solution.csv").exists());

    // forced through, the solve runs but the boundary residual fails
    let forced = tempfile::tempdir().unwrap();
    let o = solve(
        &bundled("biquadratic-bad-corner.toml"),
        forced.path(),
        &["--force"],
    );
    assert_ne!(code(&o), 3);
    let r = read_json(&forced.path().join("report.json"));
    assert_eq!(r["report"]["constraints"]["passed"], false);
}

#[test]
fn divergence_falls_back_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(&bundled("large-a11.toml"), dir.path(), &[]);
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["report"]["method"], "dense");
    assert!(r["report"]["warning"]
        .as_str()
        .unwrap()
        .contains("diverged"));
    assert_eq!(r["report"]["neumann"]["diverged"], true);

    // without fallback the divergence is a solver failure
    let dir = tempfile::tempdir().unwrap();
    let o = solve(
        &bundled("large-a11.toml"),
        dir.path(),
        &["--method", "neumann"],
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn methods_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = solve(
        &bundled("biquadratic.toml"),
        dir.path(),
        &["--method", "coupled", "--grid", "11x7", "--p", "inf"],
    );
    assert_eq!(code(&o), 0);
    let r = read_json(&dir.path().join("report.json"));
    assert_eq!(r["report"]["method"], "coupled-dense");
    assert_eq!(
        (r["grid"]["n1"].as_u64(), r["grid"]["n2"].as_u64()),
        (Some(11), Some(7))
    );
    assert_eq!(r["grid"]["p"], "inf");
}

#[test]
fn outputs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(
            code(&solve(&bundled("piecewise-a00.toml"), d.path(), &[])),
            0
        );
    }
    for f in ["solution.csv", "report.json"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.toml",
        &format!("{UNIT}[rhs]\nz22 = \"sin(\"\n[data.nonclassical]\n"),
    );
    assert_eq!(code(&solve(&bad, dir.path(), &[])), 2);
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&solve(&missing, dir.path(), &[])), 2);
    assert_eq!(
        code(&run(&[
            "solve",
            "--config",
            bad.to_str().unwrap(),
            "--grid",
            "abc"
        ])),
        2
    );
    assert_eq!(code(&run(&["verify", "no-such-suite"])), 2);
}

fn convert(config: &Path, out: &Path) -> Output {
    run(&[
        "convert",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn convert_zero_nonclassical() {
    let dir = tempfile::tempdir().unwrap();
    let o = convert(&bundled("zero.toml"), dir.path());
    assert_eq!(code(&o), 0);
    let f = read_json(&dir.path().join("classical.json"));
    assert_eq!(f["kind"], "classical");
    let funcs = f["functions"].as_object().unwrap();
    assert_eq!(funcs.len(), 4);
    for (_, v) in funcs {
        assert!(v["values"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64() == Some(0.0)));
    }
}

#[test]
fn convert_linear_traces() {
    // u = x + y
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "lin.toml",
        &format!("{UNIT}[data.classical]\nphi1 = \"y\"\nphi2 = \"1 + y\"\npsi1 = \"x\"\npsi2 = \"1 + x\"\n"),
    );
    assert_eq!(code(&convert(&cfg, dir.path())), 0);
    let f = read_json(&dir.path().join("nonclassical.json"));
    let s = &f["scalars"];
    let expect = [
        ("z00", 0.0),
        ("z10", 1.0),
        ("z01", 1.0),
        ("z00_h1", 1.0),
        ("z01_h1", 1.0),
        ("z00_h2", 1.0),
        ("z10_h2", 1.0),
    ];
    for (k, v) in expect {
        assert!((s[k].as_f64().unwrap() - v).abs() < 1e-14, "{k}");
    }
    for (_, func) in f["functions"].as_object().unwrap() {
        assert!(func["values"]
            .as_array()
            .unwrap()
            .iter()
            .all(|x| x.as_f64() == Some(0.0)));
        assert_eq!(func["expr"].as_str().unwrap().parse::<f64>().unwrap(), 0.0);
    }
}

fn max_gap(a: &Value, b: &Value) -> f64 {
    let mut gap = 0.0f64;
    for (k, v) in a["scalars"].as_object().unwrap() {
        gap = gap.max((v.as_f64().unwrap() - b["scalars"][k].as_f64().unwrap()).abs());
    }
    for (k, f) in a["functions"].as_object().unwrap() {
        let (x, y) = (
            f["values"].as_array().unwrap(),
            b["functions"][k]["values"].as_array().unwrap(),
        );
        assert_eq!(x.len(), y.len());
        for (p, q) in x.iter().zip(y) {
            gap = gap.max((p.as_f64().unwrap() - q.as_f64().unwrap()).abs());
        }
    }
    gap
}

#[test]
fn convert_twice_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    // nonclassical -> classical -> nonclassical
    let src = bundled("piecewise-a00.toml");
    let first = root.join("a");
    assert_eq!(code(&convert(&src, &first)), 0);
    let back_cfg = write_config(
        &first,
        "back.toml",
        "[domain]\nh1 = 1.0\nh2 = 1.0\n[grid]\nn1 = 25\nn2 = 25\nx_breakpoints = [0.5]\n[data]\nfile = \"classical.json\"\n",
    );
    let second = root.join("b");
    assert_eq!(code(&convert(&back_cfg, &second)), 0);
    let again = read_json(&second.join("nonclassical.json"));
    // the original, written in the same format
    let direct_cfg = write_config(root, "direct.toml", &std::fs::read_to_string(&src).unwrap());
    let third = root.join("c");
    assert_eq!(
        code(&run(&[
            "convert",
            "--config",
            direct_cfg.to_str().unwrap(),
            "--out",
            third.to_str().unwrap(),
            "--to",
            "classical",
        ])),
        0
    );
    let orig_cfg = write_config(
        &third,
        "orig.toml",
        "[domain]\nh1 = 1.0\nh2 = 1.0\n[grid]\nn1 = 25\nn2 = 25\n[data]\nfile = \"classical.json\"\n",
    );
    let fourth = root.join("d");
    assert_eq!(code(&convert(&orig_cfg, &fourth)), 0);
    assert!(max_gap(&again, &read_json(&fourth.join("nonclassical.json"))) < 1e-8);
    // scalars against the config values
    let s = &again["scalars"];
    assert!((s["z01_h1"].as_f64().unwrap() - 1f64.sin()).abs() < 1e-8);
    assert!((s["z10_h2"].as_f64().unwrap() - 1.0 - 1f64.sin()).abs() < 1e-8);
    let z02_h1 = &again["functions"]["z02_h1"];
    for (y, v) in z02_h1["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .zip(z02_h1["values"].as_array().unwrap())
    {
        let y = y.as_f64().unwrap();
        assert!((v.as_f64().unwrap() - (2.0 - 1f64.sin() * y.sin())).abs() < 1e-8);
    }

    // classical -> nonclassical -> classical
    let cls = bundled("trigonometric-classical.toml");
    let e = root.join("e");
    assert_eq!(code(&convert(&cls, &e)), 0);
    let file_cfg = write_config(
        &e,
        "fwd.toml",
        "[domain]\nh1 = 1.0\nh2 = 1.0\n[grid]\nn1 = 33\nn2 = 33\n[data]\nfile = \"nonclassical.json\"\n",
    );
    let f = root.join("f");
    assert_eq!(code(&convert(&file_cfg, &f)), 0);
    let traces = read_json(&f.join("classical.json"));
    for (name, exact) in [
        (
            "phi2",
            Box::new(|t: f64| 1f64.sin() * t.sin()) as Box<dyn Fn(f64) -> f64>,
        ),
        ("psi2", Box::new(|t: f64| 1f64.sin() * t.sin())),
        ("phi1", Box::new(|_| 0.0)),
        ("psi1", Box::new(|_| 0.0)),
    ] {
        let func = &traces["functions"][name];
        for (t, v) in func["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .zip(func["values"].as_array().unwrap())
        {
            assert!(
                (v.as_f64().unwrap() - exact(t.as_f64().unwrap())).abs() < 1e-8,
                "{name}"
            );
        }
    }
}

#[test]
fn convert_rejects_corner_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &format!("{UNIT}[data.classical]\nphi1 = \"1 + y\"\npsi1 = \"x\"\n"),
    );
    assert_eq!(code(&convert(&cfg, dir.path())), 3);
}

fn check(config: &Path) -> Output {
    run(&["check", "--config", config.to_str().unwrap()])
}

#[test]
fn check_passes_on_zero_and_converted_data() {
    assert_eq!(code(&check(&bundled("zero.toml"))), 0);
    assert_eq!(code(&check(&bundled("biquadratic.toml"))), 0);
    assert_eq!(code(&check(&bundled("trigonometric-classical.toml"))), 0);
    // classical traces produced from nonclassical data
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&convert(&bundled("piecewise-a00.toml"), dir.path())),
        0
    );
    let cfg = write_config(
        dir.path(),
        "c.toml",
        "[domain]\nh1 = 1.0\nh2 = 1.0\n[grid]\nn1 = 25\nn2 = 25\n[data]\nfile = \"classical.json\"\n",
    );
    let o = check(&cfg);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn check_names_the_mismatched_corner() {
    let dir = tempfile::tempdir().unwrap();
    // traces of u = xy except phi2, which is off at y = 0
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        &format!(
            "{UNIT}[data.classical]\nphi1 = 0.0\nphi2 = \"y + 0.1\"\npsi1 = 0.0\npsi2 = \"x\"\n"
        ),
    );
    let out = dir.path().join("out");
    let o = run(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(
        stdout.contains("phi2(0)-psi1(h1)") && stdout.contains("FAIL"),
        "{stdout}"
    );
    let r = read_json(&out.join("check.json"));
    assert_eq!(r["passed"], false);
    let bad: Vec<&str> = r["matching"]["residuals"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["value"].as_f64().unwrap().abs() > 1e-6)
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert_eq!(bad, vec!["phi2(h2)-psi2(h1)", "phi2(0)-psi1(h1)"]);
}

#[test]
fn verify_suites() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["verify", "smooth-basic", "--out", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv =
        std::fs::read_to_string(dir.path().join("verify_smooth-basic_trigonometric.csv")).unwrap();
    assert!(csv.starts_with("n,h,sup_error,order\n"));
    let orders: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(orders.iter().all(|&o| o >= 1.9), "{orders:?}");

    let o = run(&["verify", "exact-bilinear", "--out", out]);
    assert_eq!(code(&o), 0);
    let j = read_json(&dir.path().join("verify_exact-bilinear.json"));
    for t in j["tables"].as_array().unwrap() {
        for r in t["table"]["rows"].as_array().unwrap() {
            assert!(r["sup_error"].as_f64().unwrap() <= 1e-12);
        }
    }

    let o = run(&["verify", "piecewise-a00", "--out", out]);
    assert_eq!(code(&o), 0);
    assert!(dir
        .path()
        .join("verify_piecewise-a00_piecewise-a00.csv")
        .exists());
}
