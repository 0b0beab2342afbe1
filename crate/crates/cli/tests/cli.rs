use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowdecomp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn summary(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("one JSON line on stdout")
}

fn synth(dir: &Path) -> std::path::PathBuf {
    let d = dir.join("d.sbnt");
    let out = run(&[
        "synth",
        "--seed",
        "3",
        "--out",
        p(&d),
        "--gt",
        p(&dir.join("gt.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    d
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["decompose", "--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["cdf", "--in", "x.sbnt", "--k", "0"]).status.code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "decompose",
        "--in",
        "x.sbnt",
        "--out-dir",
        p(dir.path()),
        "--rho=-1",
    ];
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.sbnt");
    assert_eq!(run(&["cdf", "--in", p(&missing)]).status.code(), Some(2));
    let garbage = dir.path().join("garbage.sbnt");
    fs::write(&garbage, b"not a stack").unwrap();
    assert_eq!(
        run(&["metrics", "--in", p(&garbage)]).status.code(),
        Some(2)
    );
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{\"height\": 4}").unwrap();
    let out = run(&[
        "synth",
        "--spec",
        p(&spec),
        "--out",
        p(&dir.path().join("o.sbnt")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_non_convergence_still_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = synth(dir.path());
    let out_dir = dir.path().join("out");
    let args = [
        "decompose",
        "--in",
        p(&d),
        "--out-dir",
        p(&out_dir),
        "--max-iter",
        "2",
    ];
    let relaxed = run(&args);
    assert_eq!(relaxed.status.code(), Some(0));
    assert_eq!(summary(&relaxed)["converged"], Value::Bool(false));

    fs::remove_dir_all(&out_dir).unwrap();
    let strict = run(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(3));
    for name in ["S.sbnt", "B.sbnt", "N.sbnt", "trace.csv"] {
        assert!(out_dir.join(name).exists(), "{name} missing");
    }
    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3);
    assert!(trace.starts_with("iter,mu,rel_error,objective\n"));
}

#[test]
fn register_and_cdf_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = synth(dir.path());
    let reg = dir.path().join("reg.sbnt");
    let report = dir.path().join("reg.json");
    let out = run(&[
        "register",
        "--in",
        p(&d),
        "--out",
        p(&reg),
        "--report",
        p(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["reference"], Value::Null);
    assert_eq!(report["shifts"].as_array().unwrap().len(), 100);

    let by_frame = run(&[
        "register",
        "--in",
        p(&d),
        "--out",
        p(&reg),
        "--reference",
        "0",
    ]);
    assert_eq!(by_frame.status.code(), Some(0));
    let past_end = run(&[
        "register",
        "--in",
        p(&d),
        "--out",
        p(&reg),
        "--reference",
        "100",
    ]);
    assert_eq!(past_end.status.code(), Some(1));

    let csv = dir.path().join("cdf.csv");
    let out = run(&["cdf", "--in", p(&d), "--k", "5,100", "--out", p(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k_percent,cdf");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("100,1"));
}

#[test]
fn windowed_library_and_cli_agree() {
    use shadowdecomp::video::load_stack;
    use shadowdecomp::SolverConfig;
    use shadowdecomp_cli::decompose_windows;

    let dir = tempfile::tempdir().unwrap();
    let d = synth(dir.path());
    let out_dir = dir.path().join("out");
    let out = run(&[
        "decompose",
        "--in",
        p(&d),
        "--out-dir",
        p(&out_dir),
        "--window",
        "60",
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let windows = summary(&out)["windows"].as_array().unwrap().clone();
    assert_eq!(windows.len(), 2);
    assert_eq!(windows[1]["start"], 60);
    assert_eq!(windows[1]["frames"], 40);

    let stack = load_stack(&d).unwrap();
    let parts = decompose_windows(&stack, 60, &SolverConfig::default(), None, 1).unwrap();
    let shadow = load_stack(out_dir.join("S.sbnt")).unwrap();
    for part in &parts {
        let got = shadow.window(part.start, part.shadow.frames()).unwrap();
        assert_eq!(got, part.shadow);
    }
}
