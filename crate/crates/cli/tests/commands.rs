use std::fs;
use std::path::PathBuf;
use std::process::Command;

use sightpath::fixtures;
use sightpath::io::read_instance;
use sightpath::model::validate;
use sightpath::oracle::{check_scenarios, initial_scenarios, DEFAULT_WORLD_CAP};
use sightpath::prob::{Exact, Probability};
use sightpath::solver::ExactSolver;
use sightpath_cli::{report_checks, run, EXIT_DOMAIN, EXIT_INPUT, EXIT_OK};

fn data(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    path.display().to_string()
}

fn sightpath(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sightpath").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(output: &str, name: &str) -> f64 {
    let prefix = format!("{name}: ");
    output
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .and_then(|v| v.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("no numeric {name} in {output}"))
}

#[test]
fn validate_accepts_a_good_file() {
    let (code, out, _) = sightpath(&["validate", &data("triangle.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.ends_with(": ok\n"));
}

#[test]
fn validate_lists_a_backwards_edge() {
    let (code, out, _) = sightpath(&["validate", &data("reversed_edge.json")]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(out.contains("3-2"), "{out}");
    assert!(out.contains("tail<head"), "{out}");
}

#[test]
fn unreadable_input_exits_two() {
    assert_eq!(sightpath(&["validate", &data("no_such_file.json")]).0, EXIT_INPUT);
    assert_eq!(sightpath(&["validate", &data("truncated.json")]).0, EXIT_INPUT);
    assert_eq!(sightpath(&["frobnicate"]).0, EXIT_INPUT);
    let (code, _, err) = sightpath(&[
        "decide",
        &data("sighted_triangle.json"),
        &data("up.json"),
        "--edge",
        "1_2",
    ]);
    assert_eq!(code, EXIT_INPUT, "{err}");
}

#[test]
fn decide_takes_the_edge_toward_a_visible_up_edge() {
    let (code, out, _) = sightpath(&[
        "decide",
        &data("sighted_triangle.json"),
        &data("up.json"),
        "--edge",
        "1-2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "decide 1-2: true\nsuccess 1-2: 9/10 (0.900000000000)\nselected: 1-2\n"
    );
}

#[test]
fn decide_avoids_a_visible_down_edge() {
    let (code, out, _) = sightpath(&[
        "decide",
        &data("sighted_triangle.json"),
        &data("down.json"),
        "--edge",
        "1-2",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "decide 1-2: false\nsuccess 1-2: 0 (0.00000000000)\nselected: 1-3\n"
    );
}

#[test]
fn decide_without_sight() {
    let (code, out, _) = sightpath(&["decide", &data("triangle.json"), &data("empty.json"), "--edge", "1-3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        out,
        "decide 1-3: true\nsuccess 1-3: 7/10 (0.700000000000)\nselected: 1-3\n"
    );
}

#[test]
fn decide_in_float_mode() {
    let (code, out, _) = sightpath(&[
        "decide",
        &data("triangle.json"),
        &data("empty.json"),
        "--edge",
        "1-3",
        "--mode",
        "float",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "decide 1-3: true\nsuccess 1-3: 0.700000000000\nselected: 1-3\n");
}

#[test]
fn decide_rejects_bad_queries() {
    let (code, _, err) = sightpath(&[
        "decide",
        &data("sighted_triangle.json"),
        &data("up.json"),
        "--edge",
        "2-3",
    ]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("does not leave vertex 1"), "{err}");
    let (code, _, err) = sightpath(&[
        "decide",
        &data("sighted_triangle.json"),
        &data("empty.json"),
        "--edge",
        "1-2",
    ]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("2-3"), "{err}");
}

#[test]
fn oracle_check_fixtures() {
    let (code, out, _) = sightpath(&["oracle-check", &data("sighted_triangle.json"), "--all-scenarios"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.ends_with("2 scenario(s), 0 mismatch(es)\n"), "{out}");

    let (code, out, _) = sightpath(&["oracle-check", &data("greedy_trap.json")]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("{}: solver 27/40"), "{out}");
    assert!(out.ends_with("1 scenario(s), 0 mismatch(es)\n"), "{out}");

    let (code, out, _) = sightpath(&["oracle-check", &data("sighted_triangle.json"), "--mode", "float"]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn oracle_check_single_scenario() {
    let (code, out, _) = sightpath(&[
        "oracle-check",
        &data("sighted_triangle.json"),
        "--scenario",
        &data("down.json"),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("{2-3: down}: solver 4/5"), "{out}");
}

#[test]
fn oracle_check_refuses_past_the_cap() {
    let (code, _, err) = sightpath(&["oracle-check", &data("greedy_trap.json"), "--cap", "3"]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("enumeration cap"), "{err}");
}

#[test]
fn oracle_check_catches_a_broken_solver() {
    let b = fixtures::sighted_triangle();
    let scenarios = initial_scenarios(&b).unwrap();
    let mut solver = ExactSolver::<Exact>::new(&b).unwrap();
    let nudge = Exact::new(1.into(), 100.into());
    let checks = check_scenarios(&b, &scenarios, DEFAULT_WORLD_CAP, 0.0, |k| {
        let value = solver.best_value(1, k)?;
        Ok((Probability::add(&value, &nudge), solver.next_move(1, k)?))
    })
    .unwrap();
    let mut out = Vec::new();
    let failure = report_checks(&checks, &mut out).unwrap_err();
    assert_eq!(failure.code, EXIT_DOMAIN);
    assert!(String::from_utf8(out).unwrap().contains("MISMATCH"));
}

#[test]
fn mc_matches_policy_values() {
    for (file, expected) in [("sighted_triangle.json", 0.85), ("triangle.json", 0.7)] {
        let (code, out, _) = sightpath(&["mc", &data(file), "--trials", "100000", "--seed", "42"]);
        assert_eq!(code, EXIT_OK);
        let (rate, stderr) = (field(&out, "rate"), field(&out, "stderr"));
        assert!((rate - expected).abs() <= 3.0 * stderr, "{file}: {out}");
    }
    let first = sightpath(&["mc", &data("sighted_triangle.json"), "--trials", "5000", "--seed", "3"]);
    let second = sightpath(&["mc", &data("sighted_triangle.json"), "--trials", "5000", "--seed", "3"]);
    assert_eq!(first, second);
}

#[test]
fn mc_with_no_trials() {
    let (code, out, _) = sightpath(&["mc", &data("triangle.json"), "--trials", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("successes: 0\n"));
    assert!(out.contains("rate: 0 (undefined"));
}

#[test]
fn gen_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let (code, _, err) = sightpath(&[
            "gen",
            "--seed",
            "7",
            "--count",
            "500",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 500);
    for name in names {
        let left = fs::read_to_string(a.path().join(&name)).unwrap();
        let right = fs::read_to_string(b.path().join(&name)).unwrap();
        assert_eq!(left, right);
        assert!(validate(&read_instance(&a.path().join(&name)).unwrap()).is_ok());
    }
}

#[test]
fn gen_without_edges_gives_up() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = sightpath(&[
        "gen",
        "--edge-density",
        "0",
        "--count",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DOMAIN);
    assert!(err.contains("gave up"), "{err}");
}

#[test]
fn gap_search_finds_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = sightpath(&["gap-search", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    let found = fs::read_dir(dir.path()).unwrap().count();
    assert!(found >= 1);
    assert!(out.starts_with(&format!("{found} gap instance(s) among 500")));
}

#[test]
fn approx_at_threshold_zero_matches_decide() {
    let args = [data("sighted_triangle.json"), data("up.json")];
    let (_, decided, _) = sightpath(&["decide", &args[0], &args[1], "--edge", "1-2"]);
    let (code, out, _) = sightpath(&["approx", &args[0], &args[1], "--threshold", "0", "--edge", "1-2"]);
    assert_eq!(code, EXIT_OK);
    let (head, tail) = out.split_at(decided.len());
    assert_eq!(head, decided);
    assert!(tail.starts_with("cache: exact_hits "), "{tail}");
}

#[test]
fn approx_without_an_edge() {
    let (code, out, _) = sightpath(&["approx", &data("greedy_trap.json"), &data("empty.json")]);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.starts_with("value: 27/40 (0.675000000000)\nselected: 1-2\n"),
        "{out}"
    );
}

#[test]
fn approx_compare_shows_the_worst_case_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("sighted_triangle.json"), dir.path().join("b.json")).unwrap();
    let (code, out, _) = sightpath(&["approx-compare", dir.path().to_str().unwrap(), "--threshold", "1"]);
    assert_eq!(code, EXIT_OK);
    let row = out.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(cols[2], "no", "{out}");
    assert_eq!(cols[3], "0.100000", "{out}");
    assert!(out.contains("match rate: 0/1"), "{out}");
}

#[test]
fn approx_compare_over_a_generated_suite() {
    let (code, out, _) = sightpath(&["approx-compare", "--threshold", "0", "--count", "20"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 22);
    assert!(out.contains("match rate: 20/20 (100.0%)"), "{out}");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sightpath");
    let ok = Command::new(bin)
        .args(["validate", &data("triangle.json")])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin)
        .args(["validate", &data("reversed_edge.json")])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_DOMAIN));
    let missing = Command::new(bin)
        .args(["validate", &data("absent.json")])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(EXIT_INPUT));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.json"));
}
