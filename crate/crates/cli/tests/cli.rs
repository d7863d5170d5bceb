use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lpspace"))
}

/// Writes `body` to a fresh file under the target temp dir.
fn fixture(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lpspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> (Output, Value) {
    let out = bin().args(args).output().unwrap();
    let doc = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out, doc)
}

fn path(p: &PathBuf) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hindex_of_three_chain() {
    let rel = fixture("chain3.json", r#"{"vertices":[1,2,3],"edges":[[1,2],[2,3]]}"#);
    let (out, doc) = run(&["tree", "hindex", "--rel", path(&rel)]);
    assert!(out.status.success());
    assert_eq!(doc, serde_json::json!({"h": 3, "stable": []}));
}

#[test]
fn xpw_norm_matches_direct_computation() {
    let w = fixture("w.json", r#"{"p":4,"weights":[1,0.5,0.25]}"#);
    let x = fixture("x.json", r#"{"shape":[3],"values":[1,-2,0.5]}"#);
    let (out, doc) = run(&["norm", "xpw", "--weights", path(&w), "--coeffs", path(&x)]);
    assert!(out.status.success());
    let lp = (1.0f64 + 16.0 + 0.0625).powf(0.25);
    let l2w = (1.0f64 + 1.0 + 0.015625).sqrt();
    assert!((doc["value"].as_f64().unwrap() - lp.max(l2w)).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(bin().arg("bogus").output().unwrap().status.code(), Some(64));
    assert_eq!(bin().args(["tree"]).output().unwrap().status.code(), Some(64));

    let (out, doc) = run(&["norm", "conjugate", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["error"]["kind"], "domain");
    assert!(doc["error"]["detail"].as_str().unwrap().contains("p > 1"));

    let (out, doc) = run(&["stepfn", "dyadic", "--level", "25", "--p", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(doc["error"]["kind"], "size_cap");

    let (out, doc) = run(&["norm", "conjugate"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(doc["error"]["kind"], "usage");

    let bad = fixture("bad.json", "{not json");
    let (out, doc) = run(&["tree", "hindex", "--rel", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(doc["error"]["kind"], "input");
}

#[test]
fn identical_arguments_give_identical_bytes() {
    let args = ["dualsup", "--p", "3", "--n", "5", "--m", "4", "--cold", "--seed", "7"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dualsup_head_sum_closed_form() {
    let (out, doc) = run(&["dualsup", "--p", "4", "--n", "6", "--m", "3"]);
    assert!(out.status.success());
    // M^{1/q} with q = 4/3
    let want = 3f64.powf(0.75);
    assert!((doc["closed_form"].as_f64().unwrap() - want).abs() < 1e-12);
    assert!((doc["numeric"].as_f64().unwrap() - want).abs() < 1e-6 * want);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("lpspace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("rank.json");
    let out = bin()
        .args(["tree", "build", "--alpha", "3", "--out", target.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(doc["rank"], 3);
}

#[test]
fn khintchine_fourth_moment() {
    let a = fixture("a.json", "[1, 2, -1]");
    let (out, doc) = run(&["khintchine", "--coeffs", path(&a), "--p", "4"]);
    assert!(out.status.success());
    // 3 (sum a^2)^2 - 2 sum a^4 = 3 * 36 - 2 * 18
    assert!((doc["details"]["fourth_moment"].as_f64().unwrap() - 72.0).abs() < 1e-10);
}

#[test]
fn stepfn_pipeline() {
    let f = fixture("f.json", r#"{"coords":[{"probs":[0.25,0.75]}],"support":[0],"values":[4,0]}"#);
    let (_, doc) = run(&["stepfn", "integrate", "--input", path(&f)]);
    assert_eq!(doc["value"], 1.0);
    let (out, doc) = run(&["stepfn", "squeeze", "--input", path(&f), "--k", "0.5", "--p", "4"]);
    assert!(out.status.success());
    assert_eq!(doc["coords"][0]["probs"], serde_json::json!([0.125, 0.375, 0.5]));
}

#[test]
fn rosenthal_monte_carlo_reports_trials() {
    let c = fixture("c.json", "[1, 1, 1, 1]");
    let (out, doc) =
        run(&["rosenthal", "--family", "rademacher", "--coeffs", path(&c), "--p", "4", "--trials", "2000", "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(doc["mode"], "mc");
    assert_eq!(doc["trials"], 2000);
    assert_eq!(doc["seed"], 3);
}

#[test]
fn suite_single_criterion() {
    let (out, doc) = run(&["suite", "criterion", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["cases"], 200);
}
