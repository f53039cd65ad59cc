use std::fs;
use std::process::{Command, Output};

use thetacalc::pencil::examples;
use thetacalc::pencil::format::write_bracket;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetacalc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn examples_pass() {
    for name in ["kdv", "camassa-holm", "volterra"] {
        let o = run(&["example", name]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(!stdout(&o).contains("[FAIL]"));
    }
}

#[test]
fn reports_are_byte_stable() {
    let a = run(&["--json", "verify", "homotopy", "--p", "2", "--q", "2", "--samples", "5", "--seed", "7"]);
    let b = run(&["--json", "verify", "homotopy", "--p", "2", "--q", "2", "--samples", "5", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 5);
    assert!(v["checks"][0].get("wall_time_ms").is_none());
    let t = run(&["--json", "--timings", "verify", "homotopy", "--p", "2", "--q", "2", "--samples", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&t.stdout).unwrap();
    assert!(v["checks"][0]["wall_time_ms"].is_number());
}

#[test]
fn central_invariant_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let (b1, b2) = examples::kdv();
    let (p1, p2) = (dir.path().join("b1.json"), dir.path().join("b2.json"));
    fs::write(&p1, write_bracket(&b1).unwrap()).unwrap();
    fs::write(&p2, write_bracket(&b2).unwrap()).unwrap();
    let o = run(&["--json", "central-invariant", p1.to_str().unwrap(), p2.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["checks"][0]["value"], "1/24");
    // swapped order is not a canonical pencil
    let o = run(&["central-invariant", p2.to_str().unwrap(), p1.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn deform_and_miura_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pencil.json");
    let o = run(&["deform", "--g", "1", "--c", "1/24", "--format", "delta", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"coordinate\": \"u\""));

    let (b1, _, _) = examples::camassa_holm();
    let p = dir.path().join("ch1.json");
    fs::write(&p, write_bracket(&b1).unwrap()).unwrap();
    let o = run(&["miura", p.to_str().unwrap(), "--transform", "u + eps/(2*sqrt(2))*u1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn deform_theta_output() {
    let o = run(&["--json", "deform", "--g", "g(u)", "--c", "c(u)"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let emitted: serde_json::Value = serde_json::from_str(v["emitted"].as_str().unwrap()).unwrap();
    assert_eq!(emitted["format"], "theta");
    assert_eq!(emitted["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(run(&["central-invariant", "/nonexistent/a.json", "/nonexistent/b.json"]).status.code(), Some(2));
    assert_eq!(run(&["deform", "--g", "1 +"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "deformation", "--construct", "dlz"]).status.code(), Some(0));
}
