use std::fs;
use std::path::{Path, PathBuf};

use wfnet_cli::{execute, CommandOutcome};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/case_study")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run(args: &[&str]) -> CommandOutcome {
    let d = data();
    let mut argv = vec!["wfnet".to_string()];
    argv.extend(args.iter().map(|a| a.replace("@", &d.display().to_string())));
    execute(argv)
}

const GOLDEN: &[(&str, &[&str])] = &[
    ("validate", &["validate", "@/a1.wf", "@/pool.txt"]),
    ("compose", &["compose", "@"]),
    ("reach", &["reach", "@"]),
    ("deadlocks", &["deadlocks", "@"]),
    ("forbidden", &["forbidden", "@", "--forbidden", "@/forbidden.txt"]),
    ("synthesize", &["synthesize", "@"]),
    ("synthesize_forbidden", &["synthesize", "@", "--forbidden", "@/forbidden.txt"]),
    ("schedules", &["schedules", "@", "--weights", "@/weights.txt"]),
    ("rank", &["rank", "@", "--weights", "@/weights.txt"]),
    ("simulate", &["simulate", "@"]),
    ("simulate_r1", &["simulate", "@", "--scenario", "@/breakdown_r1.txt"]),
    ("simulate_r2", &["simulate", "@", "--scenario", "@/breakdown_r2.txt"]),
];

/// Set `WFNET_BLESS=1` to rewrite the golden files from the current output.
#[test]
fn golden_outputs() {
    let bless = std::env::var_os("WFNET_BLESS").is_some();
    let mut mismatched = Vec::new();
    for (name, args) in GOLDEN {
        let out = run(args);
        let path = golden_dir().join(format!("{name}.txt"));
        if bless {
            fs::write(&path, &out.stdout).unwrap();
            continue;
        }
        let want = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if out.stdout != want {
            mismatched.push(*name);
        }
    }
    assert!(mismatched.is_empty(), "golden mismatch: {mismatched:?}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let t = |name: &str, text: &str| {
        let p = tmp.path().join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let garbage = t("garbage.wf", "workflow A\nfly away\n");
    let dead_job = t("dead.wf", "workflow A\njob J duration 1 uses R1*3\n");
    let cyclic = t("cyclic.wf", "workflow A\njob J duration 1 uses R1\njob K duration 1 uses R1\nbefore J K\nbefore K J\n");
    let pool = t("pool.txt", "resource R1 capacity 2\n");
    let bad_pred = t("bad.pred", "mark(nowhere) >= 1\n");
    let all_r1 = t("all.pred", "mark(R1) >= 2\n");
    let stuck = t("stuck.net", "place pending_J pending_J 1\ntransition t t\nin pending_J t 2\n");
    let empty_kb = tmp.path().join("kb").display().to_string();
    let missing = tmp.path().join("missing.wf").display().to_string();

    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["frobnicate".into()], 2),
        (vec!["reach".into(), "@".into(), "--bogus".into()], 2),
        (vec![], 2),
        (vec!["--help".into()], 0),
        (vec!["validate".into(), "@".into()], 0),
        (vec!["validate".into(), garbage.clone()], 2),
        (vec!["validate".into(), missing], 2),
        (vec!["validate".into(), dead_job.clone(), pool.clone()], 1),
        (vec!["validate".into(), cyclic, pool.clone()], 1),
        (vec!["compose".into(), dead_job, pool.clone()], 1),
        (vec!["reach".into(), "@".into(), "--node-cap".into(), "10".into()], 1),
        (vec!["reach".into(), "@".into(), "--node-cap".into(), "many".into()], 2),
        (vec!["deadlocks".into(), stuck.clone()], 1),
        (vec!["deadlocks".into(), "@".into()], 0),
        (vec!["forbidden".into(), "@".into(), "--forbidden".into(), bad_pred], 2),
        (vec!["forbidden".into(), "@".into(), "--forbidden".into(), "@/forbidden.txt".into()], 1),
        (vec!["synthesize".into(), "@".into(), "--forbidden".into(), all_r1], 1),
        (vec!["schedules".into(), stuck], 2),
        (vec!["simulate".into(), "@".into(), "--scenario".into(), "@/breakdown_r2.txt".into()], 1),
        (vec!["kb".into(), "--kb".into(), empty_kb.clone(), "retire".into(), "4".into()], 1),
        (vec!["kb".into(), "--kb".into(), empty_kb, "list".into()], 0),
    ];
    for (args, code) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = run(&refs);
        assert_eq!(out.code, code, "{args:?}: {}{}", out.stdout, out.stderr);
        if code == 2 && !args.iter().any(|a| a == "--help") {
            assert!(!out.stderr.is_empty(), "{args:?} printed no diagnostics");
        }
    }
}

#[test]
fn unknown_command_prints_usage() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("Usage"));
    assert!(out.stdout.is_empty());
}

#[test]
fn every_command_is_byte_stable() {
    for (name, args) in GOLDEN {
        assert_eq!(run(args), run(args), "{name}");
    }
}

#[test]
fn out_flag_writes_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("net.txt");
    let out = run(&["compose", "@", "--out", target.to_str().unwrap()]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.is_empty());
    assert_eq!(fs::read_to_string(&target).unwrap(), run(&["compose", "@"]).stdout);
}

#[test]
fn composed_net_file_is_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let net = tmp.path().join("case.net");
    fs::write(&net, run(&["compose", "@"]).stdout).unwrap();
    let from_net = run(&["reach", net.to_str().unwrap()]);
    assert_eq!(from_net.stdout, run(&["reach", "@"]).stdout);
}

#[test]
fn kb_lifecycle() {
    let tmp = tempfile::tempdir().unwrap();
    let kb = tmp.path().join("kb");
    let kb = kb.to_str().unwrap();
    let reg = run(&["kb", "--kb", kb, "register", "@/a1.wf", "@/a2.wf", "@/a3.wf"]);
    assert_eq!((reg.code, reg.stdout.as_str()), (0, "registered A1\nregistered A2\nregistered A3\n"));
    assert_eq!(run(&["kb", "--kb", kb, "register", "@/a1.wf"]).code, 1);
    let inst = ["kb", "--kb", kb, "instantiate", "--pool", "@/pool.txt", "--instances", "@/instances.txt"];
    assert_eq!(run(&inst).stdout, "model 1\n");
    assert_eq!(run(&inst).stdout, "model 2\n");
    let stored = fs::read_to_string(tmp.path().join("kb/dynamic/1.net")).unwrap();
    assert_eq!(stored, run(&["compose", "@"]).stdout);
    assert_eq!(run(&["kb", "--kb", kb, "retire", "1"]).stdout, "retired 1\n");
    assert_eq!(run(&["kb", "--kb", kb, "retire", "1"]).code, 1);
    let list = run(&["kb", "--kb", kb, "list"]).stdout;
    assert_eq!(
        list,
        "template A1\ntemplate A2\ntemplate A3\nmodel 2 created 2 places 27 transitions 18 instances A1=1,A2=1,A3=1\n"
    );
}
