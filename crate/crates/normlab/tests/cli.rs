use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn lp(field: &str, p: &str, dim: usize) -> String {
    format!(r#"{{"field":"{field}","descriptor":{{"lp":{{"p":{p},"dim":{dim}}}}}}}"#)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normlab")).args(args).output().unwrap()
}

fn run_paths(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normlab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn diagnostic(out: &Output) -> Value {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {err}");
    serde_json::from_str(lines[0]).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn hilbert_plane_index_is_zero_with_skew_witness() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "2", 2));
    let out = run(&["index", "estimate", "--space", p(&s)]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["upper"].as_f64().unwrap().abs() <= 1e-9);
    let w = &v["witness"];
    for i in 0..2 {
        for j in 0..2 {
            let a = w[i][j].as_f64().unwrap();
            let b = w[j][i].as_f64().unwrap();
            assert!((a + b).abs() <= 1e-9);
        }
    }
}

#[test]
fn l1_has_trivial_lie_algebra() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "1", 3));
    let out = run(&["lie", "basis", "--space", p(&s)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["dimension"], 0);
}

#[test]
fn exp_formula_agrees_on_rotation() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "\"inf\"", 2));
    let op = d.file("j.json", r#"{"matrix":[[0,-1],[1,0]]}"#);
    let out = run(&["nr", "expformula", "--space", p(&s), "--op", p(&op)]);
    assert!(out.status.success());
    let v = json(&out);
    let lhs = v["lhs"].as_f64().unwrap();
    let rhs = v["rhs"].as_f64().unwrap();
    let mid = v["mid"].as_f64().unwrap();
    let tol = normlab::EXP_FORMULA_AGREEMENT;
    assert!((lhs - rhs).abs() <= tol && (lhs - mid).abs() <= tol);
    assert_eq!(v["agree"], true);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "1", 2));
    let args = ["index", "estimate", "--space", p(&s), "--seed", "7", "--budget", "16"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let keys: Vec<&String> = m.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && m.values().all(keys_sorted)
        }
        Value::Array(a) => a.iter().all(keys_sorted),
        _ => true,
    }
}

fn key_order_in_text(text: &str) -> bool {
    // top-level keys appear in sorted order in the raw output
    let v: Value = serde_json::from_str(text).unwrap();
    let mut last = 0;
    if let Value::Object(m) = &v {
        for k in m.keys() {
            let pos = text.find(&format!("\n  \"{k}\"")).unwrap();
            if pos < last {
                return false;
            }
            last = pos;
        }
    }
    true
}

fn numbers_have_provenance(v: &Value, covered: bool) -> bool {
    match v {
        Value::Number(_) => covered,
        Value::Object(m) => {
            let covered = covered || m.contains_key("provenance");
            m.values().all(|x| numbers_have_provenance(x, covered))
        }
        Value::Array(a) => a.iter().all(|x| numbers_have_provenance(x, covered)),
        _ => true,
    }
}

#[test]
fn reports_are_sorted_and_carry_provenance() {
    let d = Dir::new();
    let l2 = d.file("l2.json", &lp("real", "2", 2));
    let l1 = d.file("l1.json", &lp("real", "1", 2));
    let op = d.file("t.json", r#"{"matrix":[[1,2],[0,-1]]}"#);
    let cases: Vec<Vec<&str>> = vec![
        vec!["space", "dual", "--space", p(&l1)],
        vec!["space", "pairs", "--space", p(&l2), "--budget", "8"],
        vec!["nr", "summary", "--space", p(&l2), "--op", p(&op)],
        vec!["nr", "daugavet", "--space", p(&l1), "--op", p(&op)],
        vec!["lie", "classify", "--space", p(&l1), "--op", p(&op)],
        vec!["index", "estimate", "--space", p(&l1), "--budget", "8"],
        vec!["cantor", "build", "--k", "1", "--m", "9"],
        vec!["cantor", "quotient", "--m", "27", "--e", "l2_2"],
    ];
    for args in cases {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout.clone()).unwrap();
        let v = json(&out);
        assert!(keys_sorted(&v), "{args:?}");
        assert!(key_order_in_text(&text), "{args:?}");
        assert!(numbers_have_provenance(&v, false), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [vec!["bogus"], vec!["index", "estimate"], vec!["cantor", "grid", "--m", "10", "--k", "2"]] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(diagnostic(&out)["exit"], 2);
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn malformed_input_exits_two() {
    let d = Dir::new();
    let s = d.file("s.json", r#"{"field":"real","descriptor":{"lp":{"p":0.5,"dim":2}}}"#);
    let out = run(&["space", "dual", "--space", p(&s)]);
    assert_eq!(out.status.code(), Some(2));
    let missing = d.path("absent.json");
    let out = run(&["space", "dual", "--space", p(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(diagnostic(&out)["error"], "io");
}

#[test]
fn capability_errors_exit_three() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "2", 2));
    let out = run(&["space", "extremes", "--space", p(&s)]);
    assert_eq!(out.status.code(), Some(3));
    let diag = diagnostic(&out);
    assert_eq!(diag["error"], "capability");
    assert_eq!(diag["exit"], 3);
}

#[test]
fn failed_isometry_extension_exits_four() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "1", 2));
    let z = d.file("z.json", &lp("real", "2", 2));
    let op = d.file("t.json", r#"{"matrix":[[2,0],[0,1]]}"#);
    let out = run(&["sum", "extend", "--space", p(&s), "--op", p(&op), "--with", p(&z), "--mode", "isometry"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(diagnostic(&out)["exit"], 4);
}

#[test]
fn isometry_extension_succeeds() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "1", 2));
    let z = d.file("z.json", &lp("real", "2", 2));
    let op = d.file("t.json", r#"{"matrix":[[0,-1],[1,0]]}"#);
    let out = run(&["sum", "extend", "--space", p(&s), "--op", p(&op), "--with", p(&z), "--mode", "isometry"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn narrow_bump_exits_four_with_report() {
    let out = run(&["cantor", "bump", "--m", "27", "--lo", "0.30", "--hi", "0.34"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(diagnostic(&out)["error"], "check");
    let ok = run(&["cantor", "bump", "--m", "729", "--lo", "0.30", "--hi", "0.34"]);
    assert!(ok.status.success());
}

#[test]
fn out_flag_writes_the_file() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("real", "\"inf\"", 2));
    let target = d.path("report.json");
    let out = run(&["space", "extremes", "--space", p(&s), "--out", p(&target)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["points"].as_array().map(Vec::len), Some(4));
}

#[test]
fn csv_format_has_a_header_row() {
    let out = run(&["cantor", "grid", "--k", "2", "--m", "9", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["index", "t", "cantor"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    let gaps: Vec<&str> = rows.iter().filter(|r| &r[2] == "false").map(|r| &r[0]).collect();
    assert_eq!(gaps, ["4", "5"]);
}

#[test]
fn built_sum_has_one_rotation() {
    let d = Dir::new();
    let a = d.file("a.json", &lp("real", "2", 2));
    let b = d.file("b.json", &lp("real", "1", 1));
    let sum = d.path("sum.json");
    let out = run(&["sum", "build", "--kind", "l1", "--part", p(&a), "--part", p(&b), "--out", p(&sum)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["lie", "basis", "--space", p(&sum)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["dimension"], 1);
}

#[test]
fn dual_output_round_trips() {
    let d = Dir::new();
    let s = d.file("s.json", r#"{"field":"real","descriptor":{"polyhedral":{"vertices":[[1,0],[0.5,1]]}}}"#);
    let dual = d.path("dual.json");
    let back = d.path("back.json");
    assert!(run_paths(&[&"space", &"dual", &"--space", &s, &"--out", &dual]).status.success());
    assert!(run_paths(&[&"space", &"dual", &"--space", &dual, &"--out", &back]).status.success());
    let a = json(&run_paths(&[&"space", &"extremes", &"--space", &s]));
    let b = json(&run_paths(&[&"space", &"extremes", &"--space", &back]));
    let pts = |v: &Value| -> Vec<Vec<f64>> {
        v["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
            .collect()
    };
    let (pa, pb) = (pts(&a), pts(&b));
    assert_eq!(pa.len(), pb.len());
    for x in &pa {
        assert!(pb.iter().any(|y| x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-9)));
    }
}

#[test]
fn complex_operators_parse() {
    let d = Dir::new();
    let s = d.file("s.json", &lp("complex", "2", 2));
    let op = d.file("t.json", r#"{"matrix":[[[0,1],[0,0]],[[0,0],[0,-1]]]}"#);
    let out = run(&["lie", "classify", "--space", p(&s), "--op", p(&op)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(keys_sorted(&v));
}
