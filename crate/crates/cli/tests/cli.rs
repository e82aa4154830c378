use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpainleve")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_params(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const D5_SAMPLE: &str = r#"{"q": "3/2", "nu": ["2", "3", "5/2", "7/3", "1/2", "4/3", "5/4"],
    "kappa1": "5/3", "kappa2": "7/2", "f": "2/5", "g": "3"}"#;

#[test]
fn apply_reproduces_proof_steps() {
    let o = run(&["apply", "--family", "D5", "--word", "pi2 pi1 s2 s1 s0 s2", "--expr", "nu1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "nu7");
    let o = run(&["apply", "--family", "E7", "--word", "s0", "--expr", "f"]);
    assert_eq!(stdout(&o).trim(), "1/g");
    let o = run(&["apply", "--family", "D5", "--word", "", "--expr", "f"]);
    assert_eq!(stdout(&o).trim(), "f");
}

#[test]
fn apply_latex_uses_subscripts() {
    let o = run(&["apply", "--family", "D5", "--word", "s1", "--expr", "nu1*kappa2", "--format", "latex"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("\\kappa_{2}"), "{s}");
    assert!(!s.contains("nu1"), "{s}");
}

#[test]
fn relation_exit_codes() {
    assert_eq!(code(&run(&["verify-relations", "--family", "D5", "--seed", "7"])), 0);
    assert_eq!(code(&run(&["verify-relations", "--family", "X9"])), 2);
    let o = run(&["verify-relations", "--family", "D5", "--override", "s2:f=f + 1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness:"));
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["verify-relations"],
        &["no-such-command"],
        &["verify-relations", "--family", "D5", "--trials", "0"],
        &["verify-relations", "--family", "D5", "--prime", "1000003"],
        &["verify-relations", "--family", "D5", "--prime", "2305843009213693953"],
        &["verify-relations", "--family", "D5", "--format", "yaml"],
        &["verify-relations", "--family", "D5", "--override", "s2"],
        &["verify-relations", "--family", "D5", "--override", "s9:f=g"],
        &["verify-relations", "--family", "D5", "--override", "s2:w=g"],
        &["apply", "--family", "D5", "--word", "s1 s9", "--expr", "f"],
        &["apply", "--family", "D5", "--word", "s1", "--expr", "f + * g"],
        &["apply", "--family", "D5", "--word", "s1", "--expr", "mu"],
        &["verify-gauge", "--family", "E6", "--claim", "d5.s2"],
        &["evolve", "--family", "D5", "--params", "/nonexistent/params.json"],
        &["list", "--family", "A1"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn theorem_and_gauge_commands() {
    for fam in ["D5", "E6", "E7"] {
        assert_eq!(code(&run(&["verify-theorem", "--family", fam])), 0, "{fam}");
        assert_eq!(code(&run(&["verify-gauge", "--family", fam])), 0, "{fam}");
    }
    let o = run(&["verify-theorem", "--family", "D5", "--format", "json"]);
    let first: Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    assert_eq!(first["records"].as_array().unwrap().len(), 12);
    assert_eq!(code(&run(&["verify-theorem", "--family", "E7", "--no-constraint"])), 1);
    assert_eq!(code(&run(&["verify-gauge", "--family", "D5", "--claim", "d5.s2", "--no-constraint"])), 1);
}

#[test]
fn json_reports_are_deterministic() {
    let args = ["verify-relations", "--family", "E6", "--seed", "11", "--format", "json", "--override", "s3:g=g*nu1"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 1);
    assert_eq!(a.stdout, b.stdout);
    for line in stdout(&a).lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], 1);
    }
    let c = run(&["verify-relations", "--family", "E6", "--seed", "12", "--format", "json", "--override", "s3:g=g*nu1"]);
    assert_ne!(a.stdout, c.stdout);
}

/// Balanced braces, environments that close, and only commands from a known set.
fn latex_smoke(s: &str) {
    let known = [
        "frac", "nu", "kappa", "mapsto", "left", "right", "begin", "end", "cdot", ",", "\\", "paragraph", "item",
        "texttt", "^",
    ];
    let mut depth = 0i32;
    let mut envs = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                assert!(depth >= 0, "unbalanced braces");
            }
            '\\' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                let cmd: String = if j == i + 1 { chars[j].to_string() } else { chars[i + 1..j].iter().collect() };
                assert!(known.contains(&cmd.as_str()) || "{}_#%&$".contains(cmd.as_str()), "unknown command \\{cmd}");
                if cmd == "begin" || cmd == "end" {
                    let close = chars[j..].iter().position(|c| *c == '}').unwrap();
                    let name: String = chars[j + 1..j + close].iter().collect();
                    if cmd == "begin" {
                        envs.push(name);
                    } else {
                        assert_eq!(envs.pop(), Some(name));
                    }
                }
                i = if j == i + 1 { j + 1 } else { j };
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    assert_eq!(depth, 0);
    assert!(envs.is_empty());
}

#[test]
fn latex_generator_tables_are_well_formed() {
    for fam in ["D5", "E6", "E7"] {
        let o = run(&["list", "--family", fam, "--format", "latex"]);
        assert_eq!(code(&o), 0);
        let s = stdout(&o);
        assert!(s.contains("\\nu_{1}"));
        latex_smoke(&s);
    }
    let o = run(&["verify-relations", "--family", "D5", "--format", "latex"]);
    latex_smoke(&stdout(&o));
}

#[test]
fn evolve_zero_steps_echoes_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(dir.path(), "p.json", D5_SAMPLE);
    let o = run(&["evolve", "--family", "D5", "--params", &p, "--steps", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 1);
    assert_eq!(states[0]["q"], "3/2");
    assert_eq!(states[0]["nu"][6], "5/4");
    assert_eq!(states[0]["f"], "2/5");
}

#[test]
fn evolve_twenty_steps_keeps_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(dir.path(), "p.json", D5_SAMPLE);
    let out = dir.path().join("orbit.json");
    let o = run(&["evolve", "--family", "D5", "--params", &p, "--steps", "20", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("t=20 "));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    let states = v["states"].as_array().unwrap();
    assert_eq!(states.len(), 21);
    assert!(states.iter().all(|s| s["residual"] == "0/1"));
    assert!(v.get("error").is_none());

    // walking back from the end recovers the start
    let last = write_params(dir.path(), "last.json", &states[20].to_string());
    let o = run(&["evolve", "--family", "D5", "--params", &last, "--steps", "20", "--backward", "--format", "json"]);
    let back: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let end = &back["states"][20];
    for k in ["q", "nu", "kappa1", "kappa2", "f", "g"] {
        assert_eq!(end[k], states[0][k], "{k}");
    }
}

#[test]
fn evolve_reports_a_pole() {
    // at g = 1 = 1/nu1 the first relation loses its fbar term
    let dir = tempfile::tempdir().unwrap();
    let p = write_params(
        dir.path(),
        "pole.json",
        r#"{"q": "2", "nu": [1, 2, 3, 4, 5, 6, 7], "kappa1": 3, "kappa2": 3, "f": 1, "g": 1}"#,
    );
    let o = run(&["evolve", "--family", "D5", "--params", &p, "--steps", "5", "--format", "json"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["states"].as_array().unwrap().len(), 1);
    assert_eq!(v["error"]["kind"], "pole");
    assert_eq!(v["error"]["step"], 0);
}

#[test]
fn malformed_params_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("a.json", "not json"),
        ("b.json", r#"{"q": "2", "nu": ["1", "2"], "kappa1": "1", "kappa2": "1", "f": "1", "g": "1"}"#),
        ("c.json", r#"{"q": "1", "nu": [1, 2, 3, 4, 5, 6, 7], "kappa1": 3, "kappa2": 3, "f": 1, "g": 2}"#),
        ("d.json", r#"{"q": "2", "nu": [1, 2, 3, 4, 5, 6, 7], "kappa1": "x", "kappa2": 3, "f": 1, "g": 2}"#),
    ] {
        let p = write_params(dir.path(), name, body);
        assert_eq!(code(&run(&["evolve", "--family", "D5", "--params", &p])), 2, "{name}");
    }
}
