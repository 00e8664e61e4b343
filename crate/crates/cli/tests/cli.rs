use std::path::Path;
use std::process::{Command, Output};

use ccst::gegenbauer::{kernel_bound_log, KernelSide};
use ccst::kernels::KernelTruncation;
use serde_json::Value;

fn ccst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccst"))
        .args(args)
        .env_remove("CCST_THREADS")
        .output()
        .expect("spawn ccst")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = ccst(&["verify", "--m", "2", "--t", "1", "--K", "6", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["K"], 6);
    assert_eq!(report["seed"], 7);
    assert_eq!(report["trials"].as_array().unwrap().len(), 20);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1);
}

#[test]
fn verify_is_byte_deterministic() {
    let args = ["verify", "--m", "3", "--t", "0.5", "--K", "3", "--seed", "42", "--trials", "4"];
    let a = ccst(&args);
    let b = ccst(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let c = ccst(&["verify", "--m", "3", "--t", "0.5", "--K", "3", "--seed", "43", "--trials", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_rejects_negative_time_naming_the_field() {
    let o = ccst(&["verify", "--m", "2", "--t", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`t`"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_circle_path() {
    let o = ccst(&["verify", "--m", "1", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout_json(&o);
    assert_eq!(report["m"], 1);
    for trial in report["trials"].as_array().unwrap() {
        assert!(trial["closed_form_error"].as_f64().unwrap() < 1e-8);
    }
}

#[test]
fn verify_check_failure_exits_one() {
    let o = ccst(&["verify", "--m", "2", "--K", "2", "--trials", "2", "--tol-iso", "1e-300"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(stdout_json(&o)["pass"], false);
}

#[test]
fn verify_rejects_bad_degree_and_tolerance() {
    let o = ccst(&["verify", "--K", "6", "--degree", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = ccst(&["verify", "--tol-res", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("tol-res"));
    let o = ccst(&["verify", "--m", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`m`"));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# small run\nm = 3\nt = 0.5\nK = 2\ntrials = 2\nseed = 9\n");
    let o = ccst(&["verify", "--config", &cfg, "--t", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout_json(&o);
    assert_eq!((r["m"].as_u64(), r["t"].as_f64(), r["K"].as_u64(), r["seed"].as_u64()), (Some(3), Some(2.0), Some(2), Some(9)));

    let bad = write(dir.path(), "bad.cfg", "m = 2\nwidth = 3\n");
    let o = ccst(&["verify", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("width"));
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_ccst"))
        .args(["density", "--y-steps", "3"])
        .env("CCST_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ccst"))
        .args(["verify", "--K", "2", "--trials", "2"])
        .env("CCST_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn density_value_and_riemann_sum() {
    let o = ccst(&["density", "--m", "1", "--t", "1", "--y-min", "0", "--y-max", "0", "--y-steps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&o);
    assert_eq!(header, ["y", "rho"]);
    let rho: f64 = rows[0][1].parse().unwrap();
    assert!((rho - 0.564189584).abs() < 1e-9);
    // 1 / sqrt(pi), printed to 17 significant digits
    assert_eq!(rho, 1.0 / std::f64::consts::PI.sqrt());

    for (m, t) in [(1, 1.0), (3, 0.5)] {
        let o = ccst(&[
            "density", "--m", &m.to_string(), "--t", &t.to_string(), "--y-min", "-12", "--y-max", "12",
            "--y-steps", "4801",
        ]);
        let (_, rows) = csv_rows(&o);
        let sum: f64 = rows.iter().map(|r| r[1].parse::<f64>().unwrap()).sum::<f64>() * 0.005;
        let mf = m as f64 - 1.0;
        let analytic = (-t * mf * mf / 4.0 + t).exp();
        assert!((sum - analytic).abs() < 1e-10 * analytic, "{sum} vs {analytic}");
    }
}

#[test]
fn density_moment_columns() {
    let o = ccst(&[
        "density", "--m", "2", "--t", "0.25", "--y-min", "-10", "--y-max", "10", "--y-steps", "2001", "--moment",
        "5", "--moment", "-3", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let d = stdout_json(&o);
    for mc in d["moments"].as_array().unwrap() {
        let (r, a) = (mc["riemann_log"].as_f64().unwrap(), mc["analytic_log"].as_f64().unwrap());
        assert!((r - a).abs() < 1e-9, "{r} vs {a}");
    }
    let o = ccst(&["density", "--moment", "2", "--y-steps", "3"]);
    let (header, rows) = csv_rows(&o);
    assert_eq!(header.len(), 3);
    assert_eq!(rows.len(), 3);
}

#[test]
fn density_empty_grid_is_usage_error() {
    assert_eq!(ccst(&["density", "--y-steps", "0"]).status.code(), Some(2));
    assert_eq!(ccst(&["density", "--y-min", "1", "--y-max", "-1"]).status.code(), Some(2));
}

#[test]
fn kernel_table_rows() {
    let o = ccst(&["kernel-table", "--m", "3", "--t", "2", "--max-k", "20", "--kernel-tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    assert_eq!(&header[..3], ["k", "multiplier", "bound_log"]);
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 1.0);
    let trunc = KernelTruncation::select(3, 2.0, (0.2, 5.0), 1e-8).unwrap();
    for row in &rows {
        let k: usize = row[0].parse().unwrap();
        let mult: f64 = row[1].parse().unwrap();
        assert!((mult - (-2.0 * (k * (k + 2)) as f64 / 2.0).exp()).abs() <= 1e-15);
        let bound: f64 = row[2].parse().unwrap();
        assert_eq!(bound, kernel_bound_log(k, 3, KernelSide::Plus).unwrap());
        assert_eq!(row[5] == "yes", k <= trunc.max_degree);
        let sample: f64 = row[6].parse().unwrap();
        assert!(sample <= bound.exp() * (1.0 + 1e-12));
    }
    assert!(trunc.max_degree < 20, "{}", trunc.max_degree);
    assert!(rows.iter().any(|r| r[5] == "no"));
}

#[test]
fn kernel_table_json_and_sample_points() {
    let o = ccst(&["kernel-table", "--m", "2", "--max-k", "4", "--eta", "0,0,1", "--xi", "0,0,-1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = stdout_json(&o);
    assert_eq!(d["eta"], serde_json::json!([0.0, 0.0, 1.0]));
    assert_eq!(d["rows"].as_array().unwrap().len(), 5);
    let o = ccst(&["kernel-table", "--m", "2", "--eta", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_table_refuses_circle() {
    let o = ccst(&["kernel-table", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("circle"));
}

fn transform(dir: &Path, input: &str, extra: &[&str]) -> Output {
    let path = write(dir, "input.json", input);
    let mut args = vec!["transform", "--input", path.as_str()];
    args.extend_from_slice(extra);
    ccst(&args)
}

fn mode_norm(out: &Value, side: &str, k: u64) -> f64 {
    out["modes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["side"] == side && m["k"] == k)
        .unwrap()["norm"]
        .as_f64()
        .unwrap()
}

#[test]
fn transform_constant_stays_constant() {
    let dir = tempfile::tempdir().unwrap();
    let input = r#"{"m": 3, "polynomial": [{"exponents": [0,0,0,0], "coefficient": {"": [1.5, -0.5]}}]}"#;
    let o = transform(dir.path(), input, &["--K", "3", "--t", "0.7", "--radii", "0.3,1,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = stdout_json(&o);
    assert_eq!(d["evaluations"].as_array().unwrap().len(), 12);
    for e in d["evaluations"].as_array().unwrap() {
        for (blade, c) in e["value"].as_object().unwrap() {
            let c: Vec<f64> = c.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
            let want = if blade.is_empty() { [1.5, -0.5] } else { [0.0, 0.0] };
            assert!((c[0] - want[0]).abs() < 1e-12 && (c[1] - want[1]).abs() < 1e-12, "{blade}: {c:?}");
        }
    }
    let input_norm = d["input_norm"].as_f64().unwrap();
    assert!((input_norm - 2.5f64.sqrt()).abs() < 1e-12);
    assert!((d["ml2_norm"].as_f64().unwrap() - input_norm).abs() < 1e-12);
}

#[test]
fn transform_single_mode_gets_heat_multiplier() {
    // x1 - e12 x2 is a degree-1 inner spherical monogenic for m = 2.
    let dir = tempfile::tempdir().unwrap();
    let input = r#"{"m": 2, "polynomial": [
        {"exponents": [1,0,0], "coefficient": {"": [1.0, 0.0]}},
        {"exponents": [0,1,0], "coefficient": {"12": [-1.0, 0.0]}}]}"#;
    let o = transform(dir.path(), input, &["--K", "3", "--t", "1", "--inverse"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = stdout_json(&o);
    let f_norm = d["input_norm"].as_f64().unwrap();
    // multiplier e^{-t n (n + m - 1) / 2} with n = 1, m = 2
    let p1 = mode_norm(&d, "plus", 1);
    assert!((p1 - (-1.0f64).exp() * f_norm).abs() < 1e-12 * f_norm, "{p1}");
    for m in d["modes"].as_array().unwrap() {
        if !(m["side"] == "plus" && m["k"] == 1) {
            assert!(m["norm"].as_f64().unwrap() < 1e-12 * f_norm);
        }
    }
    let rt = &d["roundtrip"];
    assert!(rt["relative_error"].as_f64().unwrap() < 1e-12);
    assert!((rt["max_inverse_log_multiplier"].as_f64().unwrap() - 6.0).abs() < 1e-12);
    // the ML2 norm of the transform equals the input norm
    assert!((d["ml2_norm"].as_f64().unwrap() - f_norm).abs() < 1e-12);
}

#[test]
fn transform_accepts_node_values() {
    let dir = tempfile::tempdir().unwrap();
    let rule = ccst::sphere::build_quadrature::<f64>(1, 9).unwrap();
    let values: Vec<Value> = rule
        .nodes()
        .iter()
        .map(|x| serde_json::json!({ "": [x.components()[0], 0.0], "12": [0.0, x.components()[1]] }))
        .collect();
    let input = serde_json::json!({ "m": 1, "degree": 9, "values": values }).to_string();
    let o = transform(dir.path(), &input, &["--K", "3", "--t", "0.5", "--inverse", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    assert_eq!(header[0], "side");
    assert_eq!(rows.len(), 4 + 3);
}

#[test]
fn transform_inverse_beyond_cap_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let input = r#"{"m": 2, "polynomial": [{"exponents": [0,0,0], "coefficient": {"": [1.0, 0.0]}}]}"#;
    let o = transform(dir.path(), input, &["--K", "7", "--t", "1", "--inverse"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("amplification"));
    let o = transform(dir.path(), input, &["--K", "7", "--t", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn transform_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    for input in [
        "not json",
        r#"{"m": 2}"#,
        r#"{"m": 2, "bogus": 1, "values": []}"#,
        r#"{"m": 2, "degree": 6, "values": [{"": [1, 0]}]}"#,
        r#"{"m": 2, "polynomial": [{"exponents": [0,0], "coefficient": {"": [1, 0]}}]}"#,
        r#"{"m": 2, "polynomial": [{"exponents": [0,0,0], "coefficient": {"9": [1, 0]}}]}"#,
    ] {
        let o = transform(dir.path(), input, &["--K", "2"]);
        assert_eq!(o.status.code(), Some(2), "{input}: {}", stderr(&o));
    }
    let o = ccst(&["transform", "--input", "/nonexistent/input.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_reports_timing() {
    let o = ccst(&["bench", "--m", "2", "--K", "2", "--trials", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = csv_rows(&o);
    assert_eq!(header[0], "m");
    assert_eq!(rows[0].last().unwrap(), "true");
}
