//! End-to-end checks of the `rir` binary: exit codes, determinism, and
//! agreement between serialized artifacts and the library.

use std::process::{Command, Output};

use rir::bounds::{report_with, GridParams};
use rir::second_order::example_family;
use rir::RirReport;

fn rir_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn table_csv_is_deterministic_and_complete() {
    let args = ["table2", "--format", "csv", "--grid-res", "201"];
    let first = rir_bin(&args);
    let second = rir_bin(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "byte-identical reruns");
    let text = stdout_of(&first);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("z,case,rho_star,tag,rho_r,rho_o,rho_p,omega_p,error")
    );
    assert_eq!(lines.count(), 5, "five default rows");
    // The infinite-radius row renders as dashes, not as a dropped row.
    assert!(text.contains("\n1.1,c,-,unknown,inf,-,"));
}

#[test]
fn analyze_json_round_trips_against_library() {
    let out = rir_bin(&[
        "analyze", "--preset", "z=5", "--format", "json", "--grid-res", "201",
    ]);
    assert!(out.status.success());
    let parsed: RirReport = serde_json::from_slice(&out.stdout).expect("report parses");
    let (_, g) = example_family(5.0).expect("family member");
    let grid = GridParams { resolution: 201, half_width: None };
    let expected = report_with(&g, &grid).expect("library report");
    assert_eq!(parsed, expected);
}

#[test]
fn analyze_accepts_raw_coefficients() {
    // Same system as the z=5 preset, entered ascending-degree by hand.
    let preset = rir_bin(&["analyze", "--preset", "z=5", "--grid-res", "101"]);
    let manual = rir_bin(&[
        "analyze", "--num", "-10", "2", "--den", "8", "-1", "1", "--grid-res", "101",
    ]);
    assert!(preset.status.success() && manual.status.success());
    // Identical analysis; only the rendered g(s) line may differ.
    let tail = |o: &Output| stdout_of(o).lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(tail(&preset), tail(&manual));
}

#[test]
fn input_problems_exit_2() {
    // No system given.
    assert_eq!(rir_bin(&["analyze"]).status.code(), Some(2));
    // Conflicting sources.
    let out = rir_bin(&["analyze", "--preset", "z=5", "--num", "1", "--den", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    // Unknown preset.
    assert_eq!(
        rir_bin(&["analyze", "--preset", "bogus"]).status.code(),
        Some(2)
    );
    // A nominal plant that is already stable is outside the tool's domain.
    let out = rir_bin(&["analyze", "--num", "1", "--den", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("already stable"), "diagnostic: {msg}");
}

#[test]
fn numerical_problems_exit_3() {
    // Double integrator: the peak bound rejects the axis poles.
    let out = rir_bin(&["analyze", "--num", "1", "--den", "0", "0", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("imaginary axis"), "diagnostic: {msg}");
}

#[test]
fn allpass_reports_certificate_or_absence() {
    let out = rir_bin(&["allpass", "--preset", "z=1.5"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).starts_with("certificate: rho_star = 0.258012"));
    // Peak at omega = 0: the oscillatory construction does not apply.
    let out = rir_bin(&["allpass", "--preset", "z=-3"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "no certificate");
    let out = rir_bin(&["allpass", "--preset", "z=-3", "--format", "json"]);
    assert_eq!(stdout_of(&out).trim(), "null");
}

#[test]
fn fhn_writes_trajectories_and_summary() {
    let dir = tempfile::tempdir().expect("temp dir");
    let out = rir_bin(&[
        "fhn", "--eps", "0.1", "--outdir",
        dir.path().to_str().expect("utf-8 temp path"),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    assert!((summary["e0"].as_f64().unwrap() + 0.118).abs() < 2e-3);
    assert!((summary["a"].as_f64().unwrap() - 0.320).abs() < 5e-3);
    assert!((summary["delta_plus_norm"].as_f64().unwrap() - 0.130).abs() < 2e-3);

    let by_name = |name: &str| -> serde_json::Value {
        summary["scenarios"]
            .as_array()
            .unwrap()
            .iter()
            .find(|s| s["name"] == name)
            .unwrap_or_else(|| panic!("scenario {name}"))
            .clone()
    };
    assert_eq!(by_name("nominal")["outcome"], "limit_cycle");
    assert_eq!(by_name("stabilized")["outcome"], "converged");
    assert_eq!(by_name("destabilized")["outcome"], "limit_cycle");
    assert_eq!(by_name("static")["outcome"], "converged");

    for name in ["nominal", "stabilized", "destabilized", "static"] {
        let path = dir.path().join(format!("fhn_{name}.csv"));
        let body = std::fs::read_to_string(&path).expect("trajectory file");
        assert!(body.starts_with("t,v,w,x\n"), "{name} header");
        assert!(body.lines().count() > 1000, "{name} has samples");
    }
}

#[test]
fn nyquist_csv_carries_projection_annotation() {
    let out = rir_bin(&["nyquist", "--preset", "z=5", "--n", "16"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("# projection omega=2.76025594"));
    assert!(text.contains("\nomega,re,im\n"));
    assert_eq!(text.lines().count(), 3 + 16);
}
