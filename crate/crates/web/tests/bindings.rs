use qpainleve_web::{apply_word_json, claims_json, orbit_json, verify_claim_json};
use serde_json::Value;

fn json(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn apply_word_matches_the_cli() {
    let v = json(apply_word_json("D5", "pi2 pi1 s2 s1 s0 s2", "nu1").unwrap());
    assert_eq!(v["text"], "nu7");
    assert_eq!(v["latex"], "\\nu_{7}");
    let v = json(apply_word_json("E7", "s0", "f").unwrap());
    assert_eq!(v["text"], "1/g");
    assert!(apply_word_json("D5", "s9", "f").unwrap_err().contains("s9"));
    assert!(apply_word_json("D5", "s1", "f +").is_err());
}

#[test]
fn orbit_runs_and_reports_poles() {
    let params = r#"{"q": "2", "nu": [1, 2, 3, 4, 5, 6, 7], "kappa1": 3, "kappa2": 3, "f": 1, "g": 3}"#;
    let v = json(orbit_json("D5", params, 3).unwrap());
    assert_eq!(v["states"].as_array().unwrap().len(), 4);
    assert_eq!(v["states"][1]["f"], "16/5");
    let pole = params.replace("\"g\": 3", "\"g\": 1");
    let v = json(orbit_json("D5", &pole, 3).unwrap());
    assert_eq!(v["error"]["step"], 0);
    assert!(orbit_json("D5", "{}", 3).is_err());
}

#[test]
fn claims_verify_and_depend_on_the_constraint() {
    let ids: Vec<String> = serde_json::from_str(&claims_json("E6").unwrap()).unwrap();
    assert_eq!(ids, ["e6.s6", "e6.S"]);
    for id in &ids {
        assert_eq!(json(verify_claim_json("E6", id, 0, true).unwrap())["status"], "pass");
    }
    assert_eq!(json(verify_claim_json("E6", "e6.s6", 0, false).unwrap())["status"], "fail");
    assert!(verify_claim_json("E6", "d5.s2", 0, true).is_err());
}
