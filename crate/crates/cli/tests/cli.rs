use std::path::PathBuf;
use std::process::{Command, Output};

fn ivb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ivb")).args(args).output().expect("binary runs")
}

fn scenario(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "scenarios", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

fn builtins() -> Vec<String> {
    let o = ivb(&["validate", "--builtin", "list"]);
    String::from_utf8(o.stdout).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn every_builtin_validates() {
    let names = builtins();
    assert_eq!(names.len(), 14);
    for n in &names {
        let o = ivb(&["validate", "--builtin", n]);
        assert_eq!(o.status.code(), Some(0), "{n}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn chern_of_o2() {
    let o = ivb(&["chern", "--builtin", "p1-O(2)", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["output"]["class_coefficient"], "2");
    assert_eq!(r["output"]["cocycle"]["(0,1)"], "((2*z^-1)*dz)*u");
    assert_eq!(r["output"]["euler"], serde_json::json!([1, 1]));
}

#[test]
fn non_complex_is_rejected_at_load() {
    let o = ivb(&["validate", "--scenario", &scenario("not_a_complex.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("d∘d ≠ 0"));
    assert!(o.stdout.is_empty());
}

#[test]
fn parse_errors_carry_a_location() {
    let dir = std::env::temp_dir().join("ivb-cli-parse");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("broken.json");
    std::fs::write(&p, "{\n  \"kind\": \"simplex\",\n  \"ring\": 3\n}\n").unwrap();
    let o = ivb(&["validate", "--scenario", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let o = ivb(&["validate", "--builtin", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_checks_set_the_exit_code() {
    let o = ivb(&["validate", "--scenario", &scenario("bad_edge.json"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let mc = r["checks"].as_array().unwrap().iter().find(|c| c["name"] == "maurer-cartan").unwrap();
    assert_eq!(mc["passed"], false);
    assert!(mc["witness"].as_str().unwrap().contains("(0,1,0)"));
}

#[test]
fn scenario_files_pass() {
    for f in ["edge.json", "p1_o3.json"] {
        for cmd in ["validate", "mc-check", "chern", "dk-check", "trace-id", "homology", "tot-check"] {
            let o = ivb(&[cmd, "--scenario", &scenario(f)]);
            assert_eq!(o.status.code(), Some(0), "{cmd} {f}: {}", String::from_utf8_lossy(&o.stdout));
        }
    }
    let r = json(&ivb(&["chern", "--scenario", &scenario("p1_o3.json"), "--format", "json"]));
    assert_eq!(r["output"]["class_coefficient"], "3");
}

#[test]
fn dumped_builtins_reload() {
    let dir = std::env::temp_dir().join("ivb-cli-dump");
    std::fs::create_dir_all(&dir).unwrap();
    for n in builtins() {
        let o = ivb(&["validate", "--builtin", &n, "--dump"]);
        let p = dir.join(format!("{}.json", n.replace(['(', ')', ',', '[', ']'], "_")));
        std::fs::write(&p, &o.stdout).unwrap();
        let a = ivb(&["chern", "--builtin", &n, "--format", "json"]);
        let b = ivb(&["chern", "--scenario", p.to_str().unwrap(), "--format", "json"]);
        assert_eq!(b.status.code(), Some(0), "{n}");
        assert_eq!(json(&a)["output"], json(&b)["output"], "{n}");
    }
}

#[test]
fn trace_identity_on_a_seeded_corpus() {
    let o = ivb(&["trace-id", "--seed", "11", "--n", "2", "--size", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["seed"], 11);
    assert_eq!(r["checks"].as_array().unwrap().len(), 8);
}

#[test]
fn reports_are_byte_deterministic() {
    let args = ["dk-check", "--seed", "5", "--size", "3", "--degree-bound", "4", "--format", "json"];
    let a = ivb(&args);
    let b = ivb(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let t = ivb(&["dk-check", "--seed", "5", "--size", "3", "--degree-bound", "4"]);
    assert!(String::from_utf8_lossy(&t.stdout).contains("seed: 5"));
}

#[test]
fn corpus_is_reproducible_and_reloads() {
    let args = ["corpus", "--seed", "2", "--size", "3", "--degree-bound", "4", "--format", "json"];
    let a = ivb(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, ivb(&args).stdout);
    let r = json(&a);
    assert_eq!(r["output"]["per_n"], serde_json::json!({"1": 1, "2": 1, "3": 1}));
    let dir = std::env::temp_dir().join("ivb-cli-corpus");
    std::fs::create_dir_all(&dir).unwrap();
    for (i, s) in r["output"]["scenarios"].as_array().unwrap().iter().enumerate() {
        let p = dir.join(format!("{i}.json"));
        std::fs::write(&p, serde_json::to_string(s).unwrap()).unwrap();
        let o = ivb(&["mc-check", "--scenario", p.to_str().unwrap(), "--degree-bound", "4"]);
        assert_eq!(o.status.code(), Some(0), "instance {i}");
    }
}

#[test]
fn tot_check_without_input_uses_a_pattern_simplex() {
    let o = ivb(&["tot-check", "--seed", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["output"]["pattern 1-simplex: violations"], "100/100 detected");
}
