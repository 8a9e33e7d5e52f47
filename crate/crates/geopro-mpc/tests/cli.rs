//! Command-line contract: artifact layout and the exit-code mapping
//! (0 success, 2 validation/parse problems, 3 runtime failures).

mod common;

use std::path::PathBuf;
use std::process::Command;

use common::scenario_path;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_geopro-mpc")
}

fn tmp_dir(sub: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(sub);
    std::fs::create_dir_all(&dir).expect("tmp dir");
    dir
}

fn simulate_args(scenario: &std::path::Path, out: &std::path::Path) -> Vec<String> {
    [
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--method",
        "geopro-vo",
        "--horizon",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]
    .map(str::to_string)
    .to_vec()
}

#[test]
fn simulate_writes_all_artifacts() {
    let out = tmp_dir("cli_artifacts");
    let status = Command::new(bin())
        .args(simulate_args(&scenario_path("s2"), &out))
        .status()
        .expect("CLI spawns");
    assert!(status.success(), "simulate failed: {status}");
    for ext in ["csv", "meta.json", "svg", "summary.txt"] {
        let path = out.join(format!("s2_geopro-vo_N2.{ext}"));
        assert!(path.is_file(), "missing artifact {}", path.display());
    }
}

#[test]
fn malformed_scenario_exits_2() {
    let dir = tmp_dir("cli_malformed");
    let bad = dir.join("broken.json");
    std::fs::write(&bad, "{ this is not json").expect("write");
    let status = Command::new(bin())
        .args(simulate_args(&bad, &dir))
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_scenario_field_exits_2() {
    let dir = tmp_dir("cli_unknown_field");
    let text = std::fs::read_to_string(scenario_path("s2")).expect("read s2");
    let mut value: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    value["wobble"] = serde_json::json!(1.0);
    let bad = dir.join("extra.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&value).unwrap()).expect("write");
    let status = Command::new(bin())
        .args(simulate_args(&bad, &dir))
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(2));
}

#[test]
fn negative_radius_exits_2() {
    let dir = tmp_dir("cli_negative_radius");
    let text = std::fs::read_to_string(scenario_path("s2")).expect("read s2");
    let mut value: serde_json::Value = serde_json::from_str(&text).expect("valid json");
    value["obstacles"][0]["radius"] = serde_json::json!(-0.1);
    let bad = dir.join("negative.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&value).unwrap()).expect("write");
    let status = Command::new(bin())
        .args(simulate_args(&bad, &dir))
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(2));
}

#[test]
fn missing_scenario_file_exits_3() {
    let dir = tmp_dir("cli_missing");
    let status = Command::new(bin())
        .args(simulate_args(&dir.join("does-not-exist.json"), &dir))
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(3));
}

#[test]
fn unknown_method_exits_2() {
    let dir = tmp_dir("cli_bad_method");
    let status = Command::new(bin())
        .args([
            "simulate",
            "--scenario",
            scenario_path("s2").to_str().unwrap(),
            "--method",
            "warp-drive",
            "--out",
            dir.to_str().unwrap(),
        ])
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let status = Command::new(bin())
        .args(["simulate", "--frobnicate"])
        .status()
        .expect("CLI spawns");
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bench_writes_reports_and_runs() {
    let suite = tmp_dir("cli_bench_suite");
    std::fs::copy(scenario_path("s2"), suite.join("s2.json")).expect("copy scenario");
    let out = tmp_dir("cli_bench_out");
    let status = Command::new(bin())
        .args([
            "bench",
            "--suite",
            suite.to_str().unwrap(),
            "--methods",
            "geopro-vo",
            "--horizons",
            "2",
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .expect("CLI spawns");
    assert!(status.success(), "bench failed: {status}");
    assert!(out.join("report.txt").is_file());
    assert!(out.join("report.json").is_file());
    assert!(out.join("s2_geopro-vo_N2.csv").is_file());
}

#[test]
fn plot_overlays_two_traces() {
    let out = tmp_dir("cli_plot");
    for method in ["geopro-vo", "geopro-ed"] {
        let status = Command::new(bin())
            .args([
                "simulate",
                "--scenario",
                scenario_path("s2").to_str().unwrap(),
                "--method",
                method,
                "--horizon",
                "6",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .expect("CLI spawns");
        assert!(status.success());
    }
    let svg = out.join("overlay.svg");
    let status = Command::new(bin())
        .args([
            "plot",
            "--traces",
            out.join("s2_geopro-vo_N6.csv").to_str().unwrap(),
            out.join("s2_geopro-ed_N6.csv").to_str().unwrap(),
            "--out",
            svg.to_str().unwrap(),
        ])
        .status()
        .expect("CLI spawns");
    assert!(status.success(), "plot failed: {status}");
    let body = std::fs::read_to_string(&svg).expect("svg written");
    assert!(body.contains("<svg"), "not an svg document");
    assert!(body.contains("<polyline class=\"path0\""));
    assert!(body.contains("<polyline class=\"path1\""));
}
