use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn pricer(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pricer")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn links(u: [i64; 2]) -> String {
    format!(
        r#"{{
  "version": 1,
  "domain": "congestion",
  "spec": {{
    "resources": 2,
    "players": [{{"subsets": [[0], [1]]}}, {{"subsets": [[0], [1]]}}],
    "costs": {{"homogeneous": [["0", "1", "2"], ["0", "1", "2"]]}}
  }},
  "target": [{}, {}],
  "mode": "enforce"
}}"#,
        u[0], u[1]
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn parallel_links_enforced_without_tolls() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "links.json", &links([1, 1]));
    let (code, out, _) = pricer(&["enforce", s(&f)]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["outcome"], "certificate");
    assert_eq!(r["prices"], serde_json::json!({"1": "0", "2": "0"}));
}

#[test]
fn single_minded_market_has_no_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text, _) = pricer(&["gen", "walrasian-singleminded", "--seed", "3"]);
    let f = write(dir.path(), "sm.json", &text);
    let (code, out, _) = pricer(&["enforce", s(&f)]);
    assert_eq!(code, 10);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["master_value"], "7/2");
    assert_eq!(r["witness"]["best_integral_value"], "3");
}

#[test]
fn unachievable_target() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "links.json", &links([0, 0]));
    assert_eq!(pricer(&["enforce", s(&f)]).0, 11);
}

#[test]
fn check_round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "steer.json", &links([2, 0]));
    let (code, out, _) = pricer(&["enforce", s(&f)]);
    assert_eq!(code, 0);
    let cert = write(dir.path(), "cert.json", &out);
    assert_eq!(pricer(&["check", s(&f), s(&cert)]).0, 0);

    let mut r: Value = serde_json::from_str(&out).unwrap();
    let lambda1 = pricing_core::rat::parse_rat(r["prices"]["1"].as_str().unwrap()).unwrap();
    // a player moving to link 2 pays c(1) + λ₂ there, so λ₂ = λ₁ is below the threshold
    r["prices"]["2"] = Value::String(lambda1.to_string());
    let bad = write(dir.path(), "bad_price.json", &r.to_string());
    let (code, out, _) = pricer(&["check", s(&f), s(&bad)]);
    assert_eq!(code, 1);
    assert!(out.contains("deviate"), "{out}");

    let mut r: Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    r["allocation"][1] = serde_json::json!(["0", "1"]);
    let bad = write(dir.path(), "bad_alloc.json", &r.to_string());
    let (code, out, _) = pricer(&["check", s(&f), s(&bad)]);
    assert_eq!(code, 1);
    assert!(out.contains("load"), "{out}");
}

#[test]
fn generated_random_finite_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text, _) = pricer(&["gen", "random-finite", "--seed", "1", "--n", "2", "--m", "3", "--k", "4"]);
    assert_eq!(code, 0);
    let f = write(dir.path(), "rf.json", &text);
    let (code, _, err) = pricer(&["enforce", s(&f)]);
    assert!([0, 10, 11, 12].contains(&code), "{err}");
}

#[test]
fn unknown_family_and_bad_input() {
    assert_eq!(pricer(&["gen", "auction"]).0, 2);
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.json", r#"{"version": 1, "domain": "generic", "spec": {"sense": "min", "players": []}, "target": [0.5]}"#);
    assert_eq!(pricer(&["enforce", s(&f)]).0, 2);
    let f = write(dir.path(), "dec.json", &links([1, 1]).replace(r#"["0", "1", "2"], ["0", "1", "2"]"#, r#"["0", "2", "1"], ["0", "1", "2"]"#));
    let (code, _, err) = pricer(&["enforce", s(&f)]);
    assert_eq!(code, 2);
    assert!(err.contains("decreases"), "{err}");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text, _) = pricer(&["gen", "congestion-matroid", "--seed", "5"]);
    let f = write(dir.path(), "cm.json", &text);
    let strip = |out: String| {
        let mut v: Value = serde_json::from_str(&out).unwrap();
        v.as_object_mut().unwrap().remove("timing_ms");
        v
    };
    let a = strip(pricer(&["enforce", s(&f)]).1);
    let b = strip(pricer(&["enforce", s(&f)]).1);
    assert_eq!(a, b);
}

#[test]
fn batch_runs_every_file() {
    let dir = tempfile::tempdir().unwrap();
    for (k, fam) in ["kelly-gadget", "walrasian-additive", "polymatroid-uniform"].iter().enumerate() {
        let (_, text, _) = pricer(&["gen", fam, "--seed", "2"]);
        write(dir.path(), &format!("{k}.json"), &text);
    }
    let (code, out, _) = pricer(&["batch", s(dir.path()), "--jobs", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["outcome"], "fractional-witness");
    assert_eq!(lines[1]["outcome"], "certificate");
}

#[test]
fn mode_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "links.json", &links([1, 1]));
    let (code, out, _) = pricer(&["enforce", s(&f), "--mode", "unique"]);
    // two symmetric assignments meet the target, so uniqueness fails
    assert_eq!(code, 10, "{out}");
    let (code, out, _) = pricer(&["enforce", s(&f), "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("congestion certificate"));
}
