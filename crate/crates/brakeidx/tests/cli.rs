use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("brakeidx-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, file: &str, text: &str) -> String {
    let p = dir.join(file);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brakeidx")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const ROTATION_3PI: &str = r#"{"n": 1, "tau": 9.42477796076938, "B": [[1, 0], [0, 1]]}"#;

#[test]
fn index_of_rotation() {
    let d = workdir("index");
    let p = write(&d, "p.json", r#"{"n": 1, "tau": 6.283185307179586, "B": [[1, 0], [0, 1]]}"#);
    let out = run(&["index", &p, "--family", "L0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["index"], 1);
    assert_eq!(v["nullity"], 1);
    let w = json(&run(&["index", &p, "--family", "omegaL0", "--theta", "1.5707963267948966"]));
    assert_eq!(w["family"], "omegaL0");
}

#[test]
fn signature_of_rotation_is_zero() {
    let d = workdir("signature");
    let m = write(&d, "r.json", "[[0.7648421872844885, -0.644217687237691], [0.644217687237691, 0.7648421872844885]]");
    for side in ["plus", "minus"] {
        let out = run(&["signature", &m, "--side", side]);
        assert!(out.status.success());
        assert_eq!(json(&out)["signature"], 0);
    }
}

#[test]
fn verify_bott_agrees_and_is_deterministic() {
    let d = workdir("bott");
    let p = write(&d, "p.json", ROTATION_3PI);
    let a = run(&["verify-bott", &p, "--max", "3"]);
    let b = run(&["verify-bott", &p, "--max", "3"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let rows = json(&a);
    assert!(rows.as_array().unwrap().iter().all(|r| r["report"]["agree"] == true));
}

#[test]
fn galerkin_matches_the_path_engine() {
    let d = workdir("galerkin");
    let p = write(&d, "p.json", ROTATION_3PI);
    let g = json(&run(&["galerkin", &p, "--family", "sqrt"]));
    let e = json(&run(&["index", &p, "--family", "omegaL0"]));
    assert_eq!(g["record"]["index"], e["index"]);
    let csv = run(&["galerkin", &p, "--family", "l0", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("m,"));
    assert_eq!(run(&["galerkin", &p, "--family", "l0", "--space", "hat"]).status.code(), Some(2));
}

#[test]
fn omega_profile_and_iterate() {
    let d = workdir("omega");
    let p = write(&d, "p.json", ROTATION_3PI);
    let prof = run(&["omega-index", &p, "--profile", "--resolution", "16", "--format", "csv"]);
    assert_eq!(String::from_utf8(prof.stdout).unwrap().lines().count(), 17);
    let v = json(&run(&["omega-index", &p, "--omega", "3.141592653589793"]));
    assert_eq!(v["family"], "periodic");
    let it = json(&run(&["iterate", &p, "--k", "2", "--sense", "periodic"]));
    assert_eq!(it["k"], 2);
}

#[test]
fn orbit_with_spotcheck() {
    let d = workdir("orbit");
    let h = write(&d, "h.json", r#"{"kind": "harmonic", "params": {"n": 1}}"#);
    let out_file = d.join("orbit.json");
    let out = run(&["orbit", &h, "--T", "12.566370614359172", "--q0", "1", "--out", out_file.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(v["orbit"]["k"], 2);
    assert_eq!(v["brake_index"]["index"], 1);
    let csv = run(&["orbit", &h, "--T", "6.283185307179586", "--q0", "1", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().lines().count() > 100);
}

#[test]
fn verify_all_small() {
    let out = run(&["verify-all", "--seed", "3", "--cases", "3", "--n", "2", "--galerkin-cases", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["first_failure"].is_null());
}

#[test]
fn exit_codes() {
    let d = workdir("errors");
    assert_eq!(run(&["index"]).status.code(), Some(2));
    assert_eq!(run(&["index", "/nonexistent/path.json"]).status.code(), Some(2));
    let bad = write(&d, "bad.json", r#"{"n": 1, "tau": 2.0}"#);
    assert_eq!(run(&["index", &bad]).status.code(), Some(2));
    let notsp = write(&d, "m.json", "[[2, 0], [0, 2]]");
    assert_eq!(run(&["signature", &notsp]).status.code(), Some(1));
    assert_eq!(run(&["verify-all", "--cases", "1", "--n", "7"]).status.code(), Some(2));
}
