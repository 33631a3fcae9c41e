use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GAMMA: &str = "G=init -> eps ; init -> 0 . init ; init -> 1 . S ; S -> eps ; S -> 1 . S";

fn module(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/modules").join(format!("{name}.fmod"))
}

fn scratch(test: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("eqnpe-cli-{}-{test}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn eqnpe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqnpe")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn specialize_parser_to_stdout() {
    let p = module("parser");
    let o = eqnpe(&["specialize", p.to_str().unwrap(), "--call", "init | L | G", "--let", GAMMA, "-o", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    for eq in [
        "eq finit(eps) = feps .",
        "eq finit(0 L) = finit(L) .",
        "eq finit(1) = feps .",
        "eq finit(1 1 L) = fS(L) .",
        "eq fS(eps) = feps .",
        "eq fS(1 L) = fS(L) .",
    ] {
        assert!(out.contains(eq), "missing `{eq}` in\n{out}");
    }
}

#[test]
fn specialize_writes_files_that_reparse() {
    let d = scratch("reparse");
    let out = d.join("flip.spec.fmod");
    let trace = d.join("trace.jsonl");
    let dot = d.join("trees.dot");
    let p = module("flip-tree");
    let o = eqnpe(&[
        "specialize",
        p.to_str().unwrap(),
        "--call",
        "flip(flip(T:NatTree))",
        "--name",
        "flip(flip(T:NatTree))=dflip",
        "--trace",
        trace.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("dflip"), "{text}");
    assert!(std::fs::read_to_string(&dot).unwrap().contains("digraph"));
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 0);
    // the output is itself a module that specializes again
    let o = eqnpe(&["specialize", out.to_str().unwrap(), "--call", "dflip(T:NatTree)", "-o", "-"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = eqnpe(&["normalize", out.to_str().unwrap(), "dflip(1 {2} 3)"]);
    assert_eq!(stdout(&o).trim(), "1 {2} 3");
}

#[test]
fn default_output_path() {
    let d = scratch("default-out");
    let src = d.join("graph.fmod");
    std::fs::copy(module("graph"), &src).unwrap();
    let o = eqnpe(&["specialize", src.to_str().unwrap(), "--call", "flip(flip(BG:BinGraph))"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("graph.spec.fmod").exists());
}

#[test]
fn normalize_with_let() {
    let p = module("parser");
    let o = eqnpe(&["normalize", p.to_str().unwrap(), "init | 0 1 1 | G", "--let", GAMMA]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "eps | eps | G");
}

#[test]
fn narrow_and_variants() {
    let p = module("flip-tree");
    let o = eqnpe(&["narrow", p.to_str().unwrap(), "flip(T:NatTree)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| !l.trim().is_empty()).count(), 2, "{}", stdout(&o));
    let d = scratch("narrow");
    let dot = d.join("t.dot");
    let o = eqnpe(&["narrow", p.to_str().unwrap(), "flip(flip(T:NatTree))", "--dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot).unwrap().contains("->"));
    let o = eqnpe(&["variants", p.to_str().unwrap(), "flip(flip(T:NatTree))"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[leaf]"), "{}", stdout(&o));
}

#[test]
fn bench_reports_json() {
    let d = scratch("bench");
    let spec = d.join("flip.spec.fmod");
    let p = module("flip-tree");
    let o = eqnpe(&["specialize", p.to_str().unwrap(), "--call", "flip(flip(T:NatTree))", "--name", "flip(flip(T:NatTree))=dflip", "-o", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = eqnpe(&[
        "bench",
        p.to_str().unwrap(),
        spec.to_str().unwrap(),
        "--call",
        "flip(flip($))",
        "--spec-call",
        "dflip($)",
        "--size",
        "200",
        "--runs",
        "2",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["size"], 200);
    assert!(v["original"]["steps"].as_u64().unwrap() > v["specialized"]["steps"].as_u64().unwrap());
}

#[test]
fn exit_codes() {
    let o = eqnpe(&["normalize", "/nonexistent/file.fmod", "x"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    let p = module("flip-tree");
    let o = eqnpe(&["specialize", p.to_str().unwrap(), "--call", "flip(", "-o", "-"]);
    assert_eq!(o.status.code(), Some(1));

    let d = scratch("exit");
    let m = d.join("counter.fmod");
    std::fs::write(&m, eqnpe::bench::cyclic_counter_module(1300)).unwrap();
    let o = eqnpe(&["specialize", m.to_str().unwrap(), "--call", "f(c0, Y:Nat)", "--max-iter", "5", "-o", "-"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let o = eqnpe(&["frobnicate"]);
    assert_ne!(o.status.code(), Some(0));
}
