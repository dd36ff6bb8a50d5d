use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use servalloc::cli::{self, Cli, EXIT_DOMAIN, EXIT_OK, EXIT_USAGE};

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let code = cli::run(std::iter::once("servalloc").chain(args.iter().copied()), &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn binary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_servalloc")).args(args).output().unwrap()
}

#[test]
fn theory_reports_branching_factor() {
    let (code, out) = run(&["theory", "--sensors", "7", "--states", "4"]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["branching_factor"], 21);
    assert_eq!(json["lambda"].as_f64().unwrap(), 2f64.powi(-21));
    let d = json["expected_distance_bound"].as_f64().unwrap();
    assert!((d - 21.0 * 2f64.ln() / 21f64.ln()).abs() < 1e-9);
}

#[test]
fn theory_with_scenario_adds_census() {
    let scenario = manifest("configs/seven.json");
    let (code, out) = run(&["theory", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["theory"]["branching_factor"], 14);
    assert_eq!(json["census"]["total"], 2187);
}

#[test]
fn oracle_enumerates_full_space() {
    let scenario = manifest("configs/seven.json");
    let (code, out) = run(&["oracle", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("2187 allocations enumerated"), "{out}");
}

#[test]
fn census_prints_summary_json() {
    let scenario = manifest("configs/seven.json");
    let (code, out) = run(&["census", "--scenario", scenario.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["total", "optimum_gu", "optima_count", "lambda_empirical", "max_bfs_distance"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(run(&[]).0, EXIT_USAGE);
    assert_eq!(binary(&[]).status.code(), Some(EXIT_USAGE));
}

#[test]
fn over_budget_is_a_domain_error() {
    let scenario = manifest("configs/seven.json");
    let out = binary(&["oracle", "--scenario", scenario.to_str().unwrap(), "--budget", "100"]);
    assert_eq!(out.status.code(), Some(EXIT_DOMAIN));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn malformed_scenario_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"sensors\": [\n    {\"x\": 0, \"y\": }\n  ]\n}\n").unwrap();
    let out = binary(&["oracle", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json") && stderr.contains("line 3"), "{stderr}");
}

#[test]
fn simulate_flags_round_trip() {
    let argv = [
        "servalloc", "simulate", "--scenario", "s.json", "--k", "3", "--seed", "9",
        "--algorithm", "individual-hc", "--bid-mode", "marginal", "--miss-prob", "0.25",
    ];
    let cli::Command::Simulate(args) = Cli::parse_from(argv).command else { panic!() };
    let again = std::iter::once("servalloc".to_string())
        .chain(std::iter::once("simulate".to_string()))
        .chain(args.to_argv());
    let cli::Command::Simulate(reparsed) = Cli::parse_from(again).command else { panic!() };
    assert_eq!(args, reparsed);
}

#[test]
fn simulate_writes_identical_traces_for_one_seed() {
    let scenario = manifest("configs/seven.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for algorithm in ["bidding", "global-hc", "individual-hc"] {
        let mut traces = Vec::new();
        for d in &dirs {
            let (code, out) = run(&[
                "simulate", "--scenario", scenario.to_str().unwrap(), "--k", "3", "--seed", "5",
                "--algorithm", algorithm, "--miss-prob", "0.3", "--out", d.path().to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK, "{out}");
            assert!(out.contains("final GU"));
            traces.push(std::fs::read_to_string(d.path().join("trace.csv")).unwrap());
        }
        assert_eq!(traces[0], traces[1]);
        assert!(traces[0].starts_with("placement_id,run_id,k,round,"), "{}", traces[0]);
    }
}
