use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mzhv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzhv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn trace_of(entry: &Value) -> Vec<String> {
    entry["trace"].as_array().unwrap().iter().map(|p| p.as_str().unwrap().to_string()).collect()
}

#[test]
fn run_cross_pair_hv1_splits_final_fusion_evenly() {
    let o = mzhv(&["run", "fusion-cross-pair", "--engine", "hv1", "--exact"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["arithmetic"], "exact_dyadic");
    let entries = doc["entries"].as_array().unwrap();
    for first in ["even", "odd"] {
        let given: Vec<&Value> = entries.iter().filter(|e| trace_of(e)[0] == first).collect();
        assert_eq!(given.len(), 2);
        assert!(given.iter().all(|e| e["p_num"] == 1 && e["p_den"] == 4));
    }
}

#[test]
fn run_interference_quantum_is_deterministic_after_even_joint() {
    let o = mzhv(&["run", "interference-6box", "--engine", "quantum", "--exact"]);
    assert_eq!(code(&o), 0);
    for e in json(&o)["entries"].as_array().unwrap() {
        let t = trace_of(e);
        if t[0] == "even" {
            assert_eq!(t[1], "even");
            assert!((e["p_float"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        }
    }
}

#[test]
fn sampled_runs_are_byte_identical_for_a_seed() {
    let args = ["run", "interference-6box", "--engine", "hv2", "--shots", "1000", "--seed", "7"];
    let a = mzhv(&args);
    let b = mzhv(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = mzhv(&["run", "interference-6box", "--engine", "hv2", "--shots", "1000", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn run_reports_input_errors_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_syntax = write_file(dir.path(), "a.scn", "boxes 4\ninit (1,2)=even (3,4)=even\nwiggle 1 2\n");
    let invalid = write_file(dir.path(), "b.scn", "boxes 4\ninit (1,2)=even (3,4)=even\nbraid 1 3 ccw\n");
    for args in [
        vec!["run", bad_syntax.as_str()],
        vec!["run", invalid.as_str()],
        vec!["run", "no-such-scenario"],
        vec!["run", "cnot-braid"],
        vec!["run", "fusion-cross-pair", "--engine", "bogus"],
    ] {
        let o = mzhv(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn run_reports_guard_trips_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let pairs: Vec<String> = (0..9).map(|k| format!("({},{})=even", 2 * k + 1, 2 * k + 2)).collect();
    let big = write_file(dir.path(), "big.scn", &format!("boxes 18\ninit {}\nmeasure 2 3\n", pairs.join(" ")));
    assert_eq!(code(&mzhv(&["run", &big, "--engine", "quantum"])), 3);
    assert_eq!(code(&mzhv(&["run", &big, "--engine", "stab"])), 0);
}

#[test]
fn scenario_files_run_and_name_defaults_to_the_file_stem() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "mine.scn", "boxes 4\ninit (1,2)=even (3,4)=even\nmeasure 2 3\n");
    let doc = json(&mzhv(&["run", &path, "--engine", "stab"]));
    assert_eq!(doc["scenario"], "mine");
    assert_eq!(doc["entries"].as_array().unwrap().len(), 2);
    let shipped = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/scenarios/knot-p23p32.scn");
    assert_eq!(json(&mzhv(&["run", shipped.to_str().unwrap(), "--engine", "hv2"]))["scenario"], "knot-p23p32");
}

#[test]
fn out_flag_writes_json_and_prints_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = mzhv(&["run", "successive-braiding-n2", "--engine", "hv2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "[odd]\t1/1\n");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(doc["engine"], "hv2");
}

#[test]
fn compare_braiding_n2_matches() {
    let o = mzhv(&["compare", "successive-braiding-n2", "--engines", "quantum,hv2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdicts"][0]["verdict"], "match");
}

#[test]
fn compare_hv1_braid_failure_mismatches_with_tv_one() {
    let o = mzhv(&["compare", "hv1-braid-failure", "--engines", "quantum,hv1"]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    assert_eq!(r["verdicts"][0]["verdict"], "mismatch");
    assert_eq!(r["verdicts"][0]["tv"], 1.0);
}

#[test]
fn compare_same_pair_fusion_agrees_everywhere() {
    let o = mzhv(&["compare", "fusion-same-pair", "--engines", "quantum,hv1,hv2,stab"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["verdicts"].as_array().unwrap().len(), 6);
}

#[test]
fn compare_with_condition_and_tolerance() {
    let o = mzhv(&["compare", "interference-6box", "--engines", "stab,hv2", "--condition", "even"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["verdicts"][0]["tv"], 0.5);
    let loose = mzhv(&["compare", "interference-6box", "--engines", "stab,hv2", "--condition", "even", "--tol", "0.5"]);
    assert_eq!(code(&loose), 0);
    let too_long = mzhv(&["compare", "interference-6box", "--engines", "stab,hv2", "--condition", "even,odd,even"]);
    assert_eq!(code(&too_long), 2);
    assert_eq!(code(&mzhv(&["compare", "interference-6box", "--engines", "stab"])), 2);
}

#[test]
fn compare_json_is_reproducible() {
    let args = ["compare", "joint-zz-entangle", "--shots", "500", "--seed", "3"];
    let a = mzhv(&args);
    assert_eq!(a.stdout, mzhv(&args).stdout);
    assert_eq!(json(&a)["mode"], "sampled");
}

#[test]
fn hierarchy_exits_zero_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = mzhv(&["hierarchy", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.contains("| hv1 | quantum | ✓ | ✗ | ✗ |"));
    assert!(table.contains("| hv2 | quantum | ✓ | ✓ | ✗ |"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn hierarchy_with_a_loose_tolerance_deviates_and_exits_one() {
    let o = mzhv(&["hierarchy", "--tol", "1"]);
    assert_eq!(code(&o), 1);
    let diff = String::from_utf8(o.stderr).unwrap();
    assert!(diff.contains("hv1/braiding: expected mismatch, found match"), "{diff}");
}

#[test]
fn calibrate_both_oracles_agree() {
    let stab = mzhv(&["calibrate", "--oracle", "stab"]);
    let quantum = mzhv(&["calibrate", "--oracle", "quantum"]);
    assert_eq!(code(&stab), 0);
    assert_eq!(code(&quantum), 0);
    let line = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().nth(1).unwrap().to_string();
    assert_eq!(line(&stab), "convention: ccw=LeftFront cw=RightFront");
    assert_eq!(line(&stab), line(&quantum));
}

#[test]
fn calibrate_rejects_non_oracles() {
    assert_eq!(code(&mzhv(&["calibrate", "--oracle", "hv1"])), 2);
    assert_eq!(code(&mzhv(&["calibrate", "--oracle", "nonsense"])), 2);
}

#[test]
fn list_names_every_builtin() {
    let o = mzhv(&["list"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 18);
    assert!(text.lines().any(|l| l.starts_with("interference-6box")));
}
