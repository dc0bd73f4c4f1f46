//! The `oss-race` binary on the fixtures in `tests/fixtures`.

use std::path::PathBuf;
use std::process::{Command, Output};

use oss_race::Rat;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oss-race"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn json(args: &[&str]) -> Value {
    let out = run(&[args, &["--output", "json"]].concat());
    assert!(
        out.status.code().is_some_and(|c| c <= 1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn rat(v: &Value) -> Rat {
    v.as_str().expect("rational string").parse().expect("rational parses")
}

/// Keys whose string values are 0/1 profiles rather than numbers.
const PROFILE_KEYS: &[&str] = &["profile", "assignment_profile", "equilibrium_witness"];

/// Every string leaf that reads as a rational must be in canonical form.
fn check_rationals(v: &Value, key: &str, count: &mut usize) {
    match v {
        Value::String(s) if !PROFILE_KEYS.contains(&key) => {
            if let Ok(r) = s.parse::<Rat>() {
                assert_eq!(&r.to_string(), s, "under `{key}`");
                *count += 1;
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| check_rationals(x, key, count)),
        Value::Object(m) => m.iter().for_each(|(k, x)| check_rationals(x, k, count)),
        _ => {}
    }
}

const COMMANDS: &[&[&str]] = &[
    &["validate", "labs.json"],
    &["analyze", "labs.json"],
    &["analyze", "labs.json", "--profile", "1010"],
    &["solve-discrete", "labs.json"],
    &["solve-discrete", "labs.json", "--method", "oracle"],
    &["solve-discrete", "labs.json", "--nontrivial"],
    &["solve-continuous", "labs.json"],
    &["solve-continuous", "kink.json", "--variant", "paper"],
    &["deviation-report", "labs.json"],
    &["welfare", "labs.json"],
    &["check-sat-reduction", "mixed.cnf"],
];

fn with_fixture(cmd: &[&str]) -> Vec<String> {
    cmd.iter()
        .map(|a| {
            if a.ends_with(".json") || a.ends_with(".cnf") {
                fixture(a)
            } else {
                a.to_string()
            }
        })
        .collect()
}

#[test]
fn reports_are_deterministic_and_rationals_reparse() {
    for cmd in COMMANDS {
        let args = with_fixture(cmd);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        for output in ["json", "text"] {
            let full = [&args[..], &["--output", output]].concat();
            let first = run(&full);
            let second = run(&full);
            assert_eq!(first.stdout, second.stdout, "{cmd:?} {output}");
            assert!(!first.stdout.is_empty());
        }
        let report = json(&args);
        let mut count = 0;
        check_rationals(&report, "", &mut count);
        assert!(count > 0, "{cmd:?} emitted no rationals");
    }
}

#[test]
fn exit_codes_follow_the_table() {
    let labs = fixture("labs.json");
    let closed = fixture("closed.json");
    assert_eq!(code(&["solve-discrete", &labs]), 0);
    assert_eq!(code(&["solve-discrete", &closed, "--nontrivial"]), 1);
    assert_eq!(
        code(&["solve-discrete", &closed, "--nontrivial", "--method", "oracle"]),
        1
    );
    assert_eq!(code(&["validate", &fixture("broken.json")]), 2);
    assert_eq!(code(&["validate", &fixture("missing.json")]), 2);
    assert_eq!(code(&["analyze", &labs, "--profile", "10"]), 2);
    assert_eq!(code(&["solve-discrete", &labs, "--method", "simplex"]), 2);
    assert_eq!(code(&["analyze", &labs, "--cap", "2"]), 3);
    assert_eq!(code(&["solve-discrete", &labs, "--node-budget", "1"]), 3);
    assert_eq!(code(&["check-sat-reduction", &fixture("unsat.cnf")]), 0);
}

#[test]
fn parse_errors_carry_a_position() {
    let out = run(&["validate", &fixture("broken.json")]);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4, column"), "{err}");
}

#[test]
fn oracle_and_mip_equilibrium_sections_are_identical() {
    for name in ["labs.json", "kink.json", "closed.json"] {
        let f = fixture(name);
        for output in ["json", "text"] {
            let section = |method: &str| {
                let out = run(&["solve-discrete", &f, "--method", method, "--output", output]);
                let text = String::from_utf8(out.stdout).unwrap();
                let at = text.find("equilibria").expect("equilibria section");
                text[at..].to_string()
            };
            assert_eq!(section("oracle"), section("mip"), "{name} {output}");
        }
    }
}

#[test]
fn reduced_scenarios_reproduce_the_checker() {
    let dir = tempfile::tempdir().unwrap();
    for cnf in ["sat.cnf", "unsat.cnf", "mixed.cnf"] {
        let scenario = dir.path().join(format!("{cnf}.json"));
        let scenario = scenario.to_str().unwrap();
        assert_eq!(code(&["reduce-sat", &fixture(cnf), "-o", scenario]), 0);
        let check = json(&["check-sat-reduction", &fixture(cnf)]);
        let expected = check["result"]["nontrivial_pne"].as_bool().unwrap();
        assert!(check["result"]["agree"].as_bool().unwrap());
        for method in ["mip", "oracle"] {
            let solved = json(&["solve-discrete", scenario, "--nontrivial", "--method", method]);
            assert_eq!(
                solved["nontrivial"]["found"].as_bool(),
                Some(expected),
                "{cnf} {method}"
            );
        }
        let want = if expected { 0 } else { 1 };
        assert_eq!(code(&["solve-discrete", scenario, "--nontrivial"]), want);
    }
}

#[test]
fn kink_scenario_values() {
    let report = json(&["solve-continuous", &fixture("kink.json")]);
    let eq = &report["equilibrium"];
    assert_eq!(rat(&eq["profile"][0]), Rat::new(1, 2));
    assert!(eq["gaps"].as_array().unwrap().iter().all(|g| rat(g).is_zero()));
    let paper = json(&["solve-continuous", &fixture("kink.json"), "--variant", "paper"]);
    // Every equilibrium has the opener at 1/2, where a single selector cannot balance the slope.
    assert!(paper["equilibrium"].is_null());
    assert_eq!(
        code(&["solve-continuous", &fixture("kink.json"), "--variant", "paper"]),
        1
    );
}
