use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fig8(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fig8"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn riley_at_one_gives_cube_roots_of_unity() {
    let o = fig8(&["riley", "--s", "1,0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 2);
    let h = 3f64.sqrt() / 2.0;
    for (p, im) in pts.iter().zip([h, -h]) {
        assert!((p["t"]["re"].as_f64().unwrap() + 0.5).abs() < 1e-12);
        assert!((p["t"]["im"].as_f64().unwrap() - im).abs() < 1e-12);
    }
    assert_eq!(pts[0]["branch"], "+");
    assert_eq!(pts[1]["branch"], "-");
}

#[test]
fn riley_pretty_and_csv() {
    let o = fig8(&["riley", "--s", "2,0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("branch +"));
    let o = fig8(&["riley", "--s", "-1,-0.5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "s_re,s_im,t_re,t_im,branch,residual"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn riley_at_zero_is_invalid_input() {
    assert_eq!(code(&fig8(&["riley", "--s", "0,0"])), 2);
}

#[test]
fn parse_errors_exit_one() {
    assert_eq!(code(&fig8(&["riley", "--s", "abc"])), 1);
    assert_eq!(code(&fig8(&["riley"])), 1);
    assert_eq!(code(&fig8(&["torsion", "--s", "1,0", "--branch", "x"])), 1);
    assert_eq!(code(&fig8(&["riley", "--s", "1,0", "--format", "xml"])), 1);
    assert_eq!(code(&fig8(&["nonsense"])), 1);
    assert_eq!(
        code(&fig8(&["riley", "--s", "1,0", "--tol-variety", "-1"])),
        1
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&fig8(&["--help"])), 0);
    assert_eq!(code(&fig8(&["--version"])), 0);
    assert_eq!(code(&fig8(&["surgery", "--help"])), 0);
}

#[test]
fn torsion_at_geometric_point() {
    let o = fig8(&["torsion", "--s", "1,0", "--branch", "+", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!((v["tau_m"]["re"].as_f64().unwrap() + 0.5).abs() < 1e-10);
    assert_eq!(v["acyclic"], true);
    for (_, ok) in v["consistency_flags"].as_object().unwrap() {
        assert_eq!(ok, true);
    }
}

#[test]
fn torsion_pretty_lists_every_quantity() {
    let o = fig8(&["torsion", "--s", "1,0"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for label in [
        "tau(E(K))",
        "oracle",
        "u-form",
        "trace",
        "tau(M)",
        "formula",
    ] {
        assert!(text.contains(label), "missing {label}:\n{text}");
    }
    assert!(text.contains("-0.500000000000"));
}

#[test]
fn torsion_degenerate_is_reported_in_band() {
    let s = format!("{},0", (5f64.sqrt() + 1.0) / 2.0);
    let o = fig8(&["torsion", "--s", &s, "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["degenerate"], true);
    assert!(v["tau_m"].is_null());
    let o = fig8(&["torsion", "--s", &s, "--format", "csv"]);
    assert!(stdout(&o).contains("degenerate"));
}

#[test]
fn torsion_minus_branch_with_hyphen() {
    let o = fig8(&[
        "torsion", "--s", "-1.3,0.4", "--branch", "-", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["point"]["branch"], "-");
}

#[test]
fn surgery_meridian_is_empty() {
    let o = fig8(&["surgery", "--p", "1", "--q", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o), Value::Array(vec![]));
    let o = fig8(&["surgery", "--p", "1", "--q", "0", "--format", "csv"]);
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn surgery_rejects_non_coprime_slope() {
    assert_eq!(code(&fig8(&["surgery", "--p", "6", "--q", "4"])), 2);
    assert_eq!(code(&fig8(&["surgery", "--p", "0", "--q", "0"])), 2);
}

#[test]
fn surgery_csv_header_and_rows() {
    let o = fig8(&["surgery", "--p", "1", "--q", "1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "s_re,s_im,t_re,t_im,branch,u_re,u_im,trl_re,trl_im,lambda_re,lambda_im,tau_re,tau_im,res_variety,res_relation,flags"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f.len(), 16);
        assert!(f[13].parse::<f64>().unwrap() <= 1e-9);
        assert!(f[14].parse::<f64>().unwrap() <= 1e-9);
    }
}

#[test]
fn surgery_negative_slope_and_grid_flags() {
    let a = fig8(&["surgery", "--p", "-2", "--q", "-1", "--format", "json"]);
    let b = fig8(&["surgery", "--p", "2", "--q", "1", "--format", "json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(
        json(&a).as_array().unwrap().len(),
        json(&b).as_array().unwrap().len()
    );
    let o = fig8(&[
        "surgery",
        "--p",
        "2",
        "--q",
        "1",
        "--grid-circles",
        "1.5",
        "--grid-angles",
        "4",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("from 8 seeds"));
    assert_eq!(
        code(&fig8(&[
            "surgery",
            "--p",
            "2",
            "--q",
            "1",
            "--grid-angles",
            "0"
        ])),
        1
    );
}

#[test]
fn verify_fixtures_only() {
    let o = fig8(&["verify", "--samples", "0"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS geometric_point"));
}

#[test]
fn verify_is_deterministic() {
    let a = fig8(&["verify", "--samples", "20", "--seed", "11"]);
    let b = fig8(&["verify", "--samples", "20", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_failure_exits_three() {
    let o = fig8(&["verify", "--samples", "5", "--tol-compare", "1e-30"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_json_and_csv() {
    let o = fig8(&["verify", "--samples", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
    let o = fig8(&["verify", "--samples", "3", "--format", "csv"]);
    assert_eq!(
        stdout(&o).lines().next().unwrap(),
        "check,cases,max_residual,threshold,passed"
    );
}

#[test]
fn config_file_is_read_and_flags_win() {
    let path = temp_file(
        "fig8-config.toml",
        "format = \"json\"\nsamples = 2\nseed = 3\n\n[tolerances]\ncompare = 1e-8\n\n[grid]\nradii = [1.5]\nangles = 4\n",
    );
    let p = path.to_str().unwrap();
    let o = fig8(&["--config", p, "verify"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["samples"], 2);
    let o = fig8(&[
        "verify",
        "--config",
        p,
        "--samples",
        "1",
        "--format",
        "pretty",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("verify: samples=1 seed=3"));
    let o = fig8(&[
        "surgery", "--config", p, "--p", "1", "--q", "1", "--format", "pretty",
    ]);
    assert!(stdout(&o).contains("from 8 seeds"));
}

#[test]
fn bad_config_exits_one() {
    let unknown = temp_file("fig8-unknown.toml", "colour = \"blue\"\n");
    assert_eq!(
        code(&fig8(&[
            "--config",
            unknown.to_str().unwrap(),
            "riley",
            "--s",
            "1"
        ])),
        1
    );
    let negative = temp_file("fig8-negative.toml", "[tolerances]\nvariety = 0.0\n");
    assert_eq!(
        code(&fig8(&[
            "--config",
            negative.to_str().unwrap(),
            "riley",
            "--s",
            "1"
        ])),
        1
    );
    assert_eq!(
        code(&fig8(&[
            "--config",
            "/nonexistent/fig8.toml",
            "riley",
            "--s",
            "1"
        ])),
        1
    );
}
