use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn heisenberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heisenberg"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap()
}

#[test]
fn straight_line_trace() {
    let out = heisenberg(&[
        "trace",
        "--ic",
        "0;0;0;1;0;0",
        "--t-end",
        "0.003",
        "--step",
        "0.001",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let (header, rows) = csv_rows(&text);
    assert_eq!(
        header.join(","),
        "t,x_1,y_1,z,vx_1,vy_1,vz,theta,energy,alpha_residual"
    );
    let x: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(x, vec![0.0, 0.001, 0.002, 0.003]);
    assert!(rows.iter().all(|r| r[7] == rows[0][7]));
}

#[test]
fn closed_and_rk4_traces_agree() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.csv");
    let rk4 = dir.path().join("rk4.csv");
    let ic = "0.2,-0.4;0.1,0.3;-0.5;0.6,0.1;-0.2,0.7;0.3";
    for (oracle, path) in [("closed", &closed), ("rk4", &rk4)] {
        let out = heisenberg(&[
            "trace",
            "--p",
            "2",
            "--ic",
            ic,
            "--t-end",
            "2",
            "--step",
            "1e-3",
            "--oracle",
            oracle,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let (h1, a) = csv_rows(&read(&closed));
    let (h2, b) = csv_rows(&read(&rk4));
    assert_eq!(h1, h2);
    assert_eq!(a.len(), b.len());
    let worst = a
        .iter()
        .zip(&b)
        .flat_map(|(r, s)| r.iter().zip(s).map(|(u, v)| (u - v).abs()))
        .fold(0.0_f64, f64::max);
    assert!(worst < 1e-6, "{worst:e}");
}

#[test]
fn json_trace_carries_the_csv_numbers() {
    let args = ["trace", "--p", "2", "--t-end", "0.5", "--step", "0.1"];
    let csv = heisenberg(&args);
    let json = heisenberg(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(code(&json), 0);
    let (_, rows) = csv_rows(std::str::from_utf8(&csv.stdout).unwrap());
    let text = std::str::from_utf8(&json.stdout).unwrap();
    let keys = [
        "t",
        "x",
        "y",
        "z",
        "vx",
        "vy",
        "vz",
        "theta",
        "energy",
        "alpha_residual",
    ];
    let offsets: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).unwrap())
        .collect();
    assert!(offsets.windows(2).all(|w| w[0] < w[1]), "keys out of order");
    let parsed: Vec<Value> = serde_json::from_str(text).unwrap();
    assert_eq!(parsed.len(), rows.len());
    for (obj, row) in parsed.iter().zip(&rows) {
        assert_eq!(obj.as_object().unwrap().len(), keys.len());
        let mut flat = vec![obj["t"].as_f64().unwrap()];
        for key in [
            "x",
            "y",
            "z",
            "vx",
            "vy",
            "vz",
            "theta",
            "energy",
            "alpha_residual",
        ] {
            match &obj[key] {
                Value::Array(v) => flat.extend(v.iter().map(|n| n.as_f64().unwrap())),
                n => flat.push(n.as_f64().unwrap()),
            }
        }
        assert_eq!(&flat, row);
    }
}

#[test]
fn trace_is_byte_identical_across_runs() {
    let args = [
        "trace", "--p", "3", "--t-end", "-2", "--step", "0.01", "--oracle", "rk4",
    ];
    assert_eq!(heisenberg(&args).stdout, heisenberg(&args).stdout);
}

#[test]
fn trace_rejects_bad_configuration() {
    for (args, field) in [
        (
            vec!["trace", "--kind", "riemannian", "--oracle", "closed"],
            "--oracle",
        ),
        (vec!["trace", "--ic", "1;2;3"], "--ic"),
        (vec!["trace", "--t-end", "0"], "--t-end"),
        (vec!["trace", "--step", "-1"], "--step"),
        (vec!["trace", "--form", "custom-coeffs"], "--coeffs"),
        (vec!["trace", "--p", "0"], "--p"),
    ] {
        let out = heisenberg(&args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(stderr(&out).contains(field), "{args:?}: {}", stderr(&out));
    }
    assert_eq!(code(&heisenberg(&["trace", "--no-such-flag"])), 1);
    assert_eq!(code(&heisenberg(&["--help"])), 0);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let out = heisenberg(&["trace", "--out", "/nonexistent-dir/trace.csv"]);
    assert_eq!(code(&out), 2);
    let missing_config = heisenberg(&["trace", "--config", "/nonexistent-dir/run.toml"]);
    assert_eq!(code(&missing_config), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "p = 2\nt_end = 0.2\nstep = 0.1\nformat = \"json\"\n",
    )
    .unwrap();
    let out = heisenberg(&[
        "trace",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(std::str::from_utf8(&out.stdout).unwrap());
    assert_eq!(header.len(), 2 * (2 * 2 + 1) + 4);
    assert_eq!(rows.len(), 3);
}

#[test]
fn custom_coefficients_equal_to_theta_verify() {
    let out = heisenberg(&[
        "verify",
        "--p",
        "1",
        "--samples",
        "5",
        "--form",
        "custom-coeffs",
        "--coeffs",
        "2;-2;0",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn verify_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        let out = heisenberg(&[
            "verify",
            "--p",
            "1",
            "--samples",
            "8",
            "--seed",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report: Value = serde_json::from_str(&read(&a)).unwrap();
    assert_eq!(report["pass"], Value::Bool(true));
    let names: Vec<&str> = report["reports"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for expected in [
        "group_laws",
        "left_invariance",
        "signature",
        "conservation",
        "oracle_equivalence_christoffel",
        "theta_transport",
        "frobenius",
    ] {
        assert!(
            names.contains(&expected),
            "{expected} missing from {names:?}"
        );
    }
}

#[test]
fn riemannian_verify_fails_with_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = heisenberg(&[
        "verify",
        "--p",
        "1",
        "--kind",
        "riemannian",
        "--form",
        "theta",
        "--samples",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let report: Value = serde_json::from_str(&read(&path)).unwrap();
    assert_eq!(report["pass"], Value::Bool(false));
    assert_eq!(report["reports"][0]["counterexample"]["status"], "found");
}

#[test]
fn verify_rejects_zero_dimension() {
    let out = heisenberg(&["verify", "--p", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--p"));
}

#[test]
fn search_finds_a_witness() {
    let out = heisenberg(&["search", "--seed", "5"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let witness: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(witness["outcome"]["status"], "found");
    let w = &witness["outcome"]["witness"];
    assert!(w["theta_initial"].as_f64().unwrap().abs() < 1e-12);
    assert!(w["theta_at_t_star"].as_f64().unwrap().abs() > 0.1);
    assert!(w["t_star"].as_f64().unwrap() <= 5.0);
    assert_eq!(out.stdout, heisenberg(&["search", "--seed", "5"]).stdout);
}

#[test]
fn search_exit_codes() {
    let unreachable = heisenberg(&["search", "--threshold", "1e9", "--tries", "3"]);
    assert_eq!(code(&unreachable), 4);
    let report: Value = serde_json::from_slice(&unreachable.stdout).unwrap();
    assert_eq!(report["outcome"]["status"], "not_found");
    assert_eq!(code(&heisenberg(&["search", "--kind", "pseudo"])), 1);
}

#[test]
fn metric_dump() {
    let out = heisenberg(&["metric", "--p", "1", "--point", "0.5;1;0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let dump: Value = serde_json::from_slice(&out.stdout).unwrap();
    let g: Vec<Vec<f64>> = serde_json::from_value(dump["components"].clone()).unwrap();
    // g = -dx^2 + dy^2 + (dz + x dy)^2 at x = 1/2
    assert_eq!(
        g,
        vec![
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 1.25, 0.5],
            vec![0.0, 0.5, 1.0]
        ]
    );
    assert_eq!(dump["signature"]["negatives"], 1);
    assert_eq!(dump["signature"]["positives"], 2);
    let gamma: Vec<Vec<Vec<f64>>> = serde_json::from_value(dump["christoffel"].clone()).unwrap();
    for upper in &gamma {
        for (i, row) in upper.iter().enumerate() {
            for (j, value) in row.iter().enumerate() {
                assert_eq!(*value, upper[j][i]);
            }
        }
    }
    assert_eq!(code(&heisenberg(&["metric", "--format", "csv"])), 1);
}
