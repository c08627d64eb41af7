use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }
}

fn kamio() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kamio"));
    cmd.env_remove("KAMIO_FUEL");
    cmd
}

fn exec(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    kamio().args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn run_reports_outcome_and_output() {
    let ws = Workspace::new();
    let p = ws.file("p.kam", "read (write0 end) (write1 end) end * nil");
    let o = exec(&[&"run", &p, &"--input", &"1"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("outcome: terminated"), "{text}");
    assert!(text.contains("output: 1\n"), "{text}");
    assert!(text.contains("labels: r1 w1 e"), "{text}");

    let o = exec(&[&"--format", &"json", &"trace", &p, &"--input", &"0"]);
    let v = json(&o);
    assert_eq!(v["outcome"], "terminated");
    assert_eq!(v["output"], "0");
    assert_eq!(v["labels"], serde_json::json!(["r0", "w0", "e"]));
    assert!(v["trace"].as_array().unwrap().contains(&Value::from("tau")));
}

#[test]
fn run_exit_codes() {
    let ws = Workspace::new();
    let stuck = ws.file("stuck.kam", "read * nil");
    assert_eq!(code(&exec(&[&"run", &stuck])), 2);
    let omega = ws.file("omega.kam", "(\\x. x x) (\\x. x x) * nil");
    assert_eq!(code(&exec(&[&"--fuel", &"100", &"run", &omega])), 3);
    let bad = ws.file("bad.kam", "(\\x. * nil");
    let o = exec(&[&"run", &bad]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(code(&exec(&[&"run", &ws.dir.path().join("missing.kam")])), 1);
}

#[test]
fn fuel_from_environment() {
    let ws = Workspace::new();
    let omega = ws.file("omega.kam", "(\\x. x x) (\\x. x x) * nil");
    let o = kamio().env("KAMIO_FUEL", "50").args(["--format", "json", "run"]).arg(&omega).output().unwrap();
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["steps"], 50);
}

#[test]
fn reads_from_stdin() {
    let mut child = kamio()
        .args(["parse", "-", "--as", "term"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"\\x y. x   y").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "\\x. \\y. x y");
}

#[test]
fn parse_kinds() {
    let ws = Workspace::new();
    let s = ws.file("s.kam", "end :: cc :: nil");
    let o = exec(&[&"--format", &"json", &"parse", &s, &"--as", &"stack"]);
    assert_eq!(json(&o)["kind"], "stack");
    let d = ws.file("d.kam", "I := \\x. x;\nK := \\x y. x;");
    let o = exec(&[&"parse", &d, &"--as", &"definitions"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 2);
    let reserved = ws.file("r.kam", "\\end. end");
    assert_eq!(code(&exec(&[&"parse", &reserved, &"--as", &"term"])), 1);
}

#[test]
fn bisim_witness_and_verification() {
    let ws = Workspace::new();
    let a = ws.file("a.kam", "write0 end * nil");
    let b = ws.file("b.kam", "write0 (write1 end) * nil");
    let c = ws.file("c.kam", "(\\x. write0 x) end * nil");
    let o = exec(&[&"--format", &"json", &"bisim", &a, &b]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["witness"], serde_json::json!(["w0", "w1"]));
    let o = exec(&[&"bisim", &a, &c]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "verified");
}

#[test]
fn topequiv_with_separate_io() {
    let ws = Workspace::new();
    let end = ws.file("end.kam", "end * nil");
    let top = ws.file("top.kam", "TOP");
    assert_eq!(code(&exec(&[&"topequiv", &end, &top])), 0);
    assert_eq!(code(&exec(&[&"topequiv", &end, &end, &"--right-input", &"1"])), 2);
    let w = ws.file("w.kam", "write1 end * nil");
    assert_eq!(code(&exec(&[&"topequiv", &w, &top, &"--right-output", &"1"])), 0);
}

#[test]
fn compile_decode_and_verify() {
    let ws = Workspace::new();
    let succ = ws.file("succ.lam", "S");
    let out = ws.dir.path().join("succ.proc");
    let o = exec(&[&"--prelude", &"compile-fn", &succ, &"-o", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = ws.file("t.tsv", "# n\tf(n)\n0\t1\n5\t6\n9\t10\n");
    let o = exec(&[&"verify-impl", &out, &"--table", &table]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("verified"));

    let wrong = ws.file("wrong.tsv", "0\t1\n5\t5\n");
    let o = exec(&[&"--format", &"json", &"verify-impl", &out, &"--table", &wrong]);
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o)["witness"], 5);

    let malformed = ws.file("m.tsv", "0 1\n");
    assert_eq!(code(&exec(&[&"verify-impl", &out, &"--table", &malformed])), 1);

    let n = ws.file("n.lam", "B #5");
    let o = exec(&[&"--prelude", &"decode", &n]);
    assert_eq!((code(&o), stdout(&o).trim().to_owned()), (0, "10".to_owned()));
    let not_numeral = ws.file("cc.lam", "\\f x. cc");
    assert_eq!(code(&exec(&[&"decode", &not_numeral])), 3);
    let open = ws.file("open.lam", "\\x. y");
    assert_eq!(code(&exec(&[&"decode", &open])), 1);
    let effectful = ws.file("eff.lam", "\\x. end");
    assert_eq!(code(&exec(&[&"compile-fn", &effectful])), 1);
}

#[test]
fn names_need_a_prelude() {
    let ws = Workspace::new();
    let p = ws.file("p.kam", "W #2 * nil");
    assert_eq!(code(&exec(&[&"run", &p])), 1);
    let o = exec(&[&"--prelude", &"run", &p]);
    assert!(stdout(&o).contains("output: 10\n"), "{}", stdout(&o));

    let defs = ws.file("defs.kam", "TWICE := \\f x. f (f x);\nSS := TWICE S;");
    let q = ws.file("q.lam", "SS #3");
    let o = exec(&[&"--prelude", &"--prelude-file", &defs, &"decode", &q]);
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn prelude_listing() {
    let o = exec(&[&"--format", &"json", &"prelude-list"]);
    let v = json(&o);
    for name in ["B", "C", "H", "S", "E", "Z", "Y", "F", "Q", "R", "V", "W"] {
        assert!(v.get(name).is_some(), "{name} missing");
    }
}

const ENTAILMENT: &str = r#"{
  "kind": "entailment",
  "pole": {"kind": "finite", "seeds": ["end * nil"], "fuel": 1000},
  "predicates": [{"predicate": "phi", "index": "i", "stacks": ["cc :: nil"]}],
  "realizers": {"phi": {"i": ["\\x. end"]}},
  "hypotheses": ["phi"],
  "conclusion": "phi",
  "candidate": "CANDIDATE"
}"#;

#[test]
fn realize_scenarios() {
    let ws = Workspace::new();
    let good = ws.file("good.json", &ENTAILMENT.replace("CANDIDATE", "\\\\x. x"));
    let o = exec(&[&"--format", &"json", &"realize", &good]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["kind"], "entailment");
    assert_eq!(v["verdict"], "verified");
    assert_eq!(v["caveats"], serde_json::json!(["finite_realizers"]));

    let bad = ws.file("bad.json", &ENTAILMENT.replace("CANDIDATE", "\\\\x y. x"));
    let o = exec(&[&"realize", &bad]);
    assert_eq!(code(&o), 2);
    // Text mode pretty-prints the same JSON report.
    assert!(stdout(&o).contains("\"refuted\""));

    let effectful = ws.file("eff.json", &ENTAILMENT.replace("CANDIDATE", "end"));
    assert_eq!(code(&exec(&[&"realize", &effectful])), 1);
    let unknown_field = ws.file("u.json", r#"{"kind": "realizes", "bogus": 1}"#);
    assert_eq!(code(&exec(&[&"realize", &unknown_field])), 1);
}

#[test]
fn output_is_deterministic() {
    let ws = Workspace::new();
    let a = ws.file("a.kam", "cc (\\k. read (k (write0 end)) (write1 end) end) * nil");
    let b = ws.file("b.kam", "read (write0 end) (write1 end) end * nil");
    let first = exec(&[&"--format", &"json", &"bisim", &a, &b]);
    let second = exec(&[&"--format", &"json", &"bisim", &a, &b]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(code(&first), code(&second));
}
