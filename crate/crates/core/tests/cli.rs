mod common;

use std::process::Command;

use common::*;
use sitelens::cli::{run_with, EXIT_DATA, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sitelens").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn fixture_arg() -> String {
    fixture_dir().display().to_string()
}

#[test]
fn where_csv_ranks_counties() {
    let f = fixture_arg();
    let (code, out, _) = run(&["where", &f, "--level", "county", "--scope", "NRW", "--t", "2016-01", "--rank-by", "population:desc", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "name,population,site_id");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("Unna,416679"), "{}", lines[1]);
    assert_eq!(lines[1], "Unna,416679,05978");
}

#[test]
fn where_json_round_trips_engine_values() {
    let f = fixture_arg();
    let (code, out, _) = run(&["where", &f, "--level", "district", "--scope", "Gütersloh", "--predicate", "population>=2500", "--predicate", "supermarket_count = 0", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 1);
    assert_eq!(v[0]["site_id"], HERZEBROCK_CLARHOLZ);
    assert_eq!(v[0]["values"][0]["value"], 15_969.0);
}

#[test]
fn when_prints_intervals() {
    let (code, out, _) = run(&["when", &fixture_arg(), "--site", "Hamburg", "--factor", "unemployment_rate", "--predicate", "<7"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "2016-06..2016-06\n");
}

#[test]
fn what_and_compare() {
    let f = fixture_arg();
    let (code, out, _) = run(&["what", &f, "--site", "Gütersloh", "--factors", "income_per_household", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "factor,t,value,coverage\nincome_per_household,2016-01,18102,1\n");

    let (code, out, _) = run(&["compare", &f, "--sites", "Gütersloh,Unna", "--factors", "income_per_household,population", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().last().unwrap(), "best,05754,05978");
}

#[test]
fn checklist_from_criteria_file() {
    let dir = tempfile::tempdir().unwrap();
    let criteria = dir.path().join("criteria.json");
    std::fs::write(
        &criteria,
        r#"[{"factor": "population", "weight": 2, "plus_threshold": 400000, "minus_threshold": 300000, "direction": "higher_is_better"}]"#,
    )
    .unwrap();
    let (code, out, _) = run(&["checklist", &fixture_arg(), "--criteria", criteria.to_str().unwrap(), "--sites", "Unna,Soest,Coesfeld", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "rank,site_id,population,total\n1,05978,+,2\n2,05974,o,0\n3,05558,-,-2\n");

    std::fs::write(&criteria, "[{]").unwrap();
    let (code, _, err) = run(&["checklist", &fixture_arg(), "--criteria", criteria.to_str().unwrap(), "--sites", "Unna"]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("criteria.json"), "{err}");
}

#[test]
fn choropleth_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("map.svg");
    let (code, _, _) = run(&["choropleth", &fixture_arg(), "--parent", "NRW", "--factor", "population", "--k", "4", "--out", out_path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let svg = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(svg.matches("<path ").count(), 4);
    assert_eq!(svg.matches("legend-entry").count(), 4);
}

#[test]
fn synth_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&["synth", "--seed", "9", "--levels", "1,3,9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (code, out, _) = run(&["validate", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("ok: 13 sites, 6 factors"), "{out}");
}

#[test]
fn exit_codes() {
    let f = fixture_arg();
    let (code, _, err) = run(&["validate", broken_dir().to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
    assert!(err.contains("duplicate site id") && err.contains("unresolved parent"), "{err}");

    assert_eq!(run(&["where", &f, "--level", "county", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(run(&["where", &f, "--level", "county", "--predicate", "population ~ 3"]).0, EXIT_USAGE);
    assert_eq!(run(&["where", &f, "--level", "planet"]).0, EXIT_DATA);
    assert_eq!(run(&["when", &f, "--site", "Atlantis", "--factor", "population", "--predicate", "<1"]).0, EXIT_DATA);
    assert_eq!(run(&["what", "/nonexistent/bundle", "--site", "x", "--factors", "y"]).0, EXIT_DATA);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("between"));
}

#[test]
fn binary_exit_status() {
    let bin = env!("CARGO_BIN_EXE_sitelens");
    let status = Command::new(bin).args(["validate", broken_dir().to_str().unwrap()]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_DATA));
    let ok = Command::new(bin).args(["validate", &fixture_arg()]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
}
