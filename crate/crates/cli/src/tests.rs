use std::fs;
use std::path::{Path, PathBuf};

use super::{execute, ExitStatus, Outcome, FORMAT_HEADER};

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn cli(args: &[&str]) -> Outcome {
    execute(std::iter::once("cstuple").chain(args.iter().copied()))
}

fn scratch(dir: &Path, name: &str, text: &str) -> String {
    let p: PathBuf = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn check_verdicts_and_codes() {
    let ok = cli(&["check", &corpus("binadd.strs"), &corpus("binadd.csi")]);
    assert_eq!(ok.status, ExitStatus::Success, "{}", ok.stderr);
    assert!(ok.stdout.starts_with(FORMAT_HEADER));
    assert_eq!(ok.field("overall"), Some("tested"));

    let bad = cli(&["check", &corpus("arith.strs"), &corpus("arith.csi")]);
    assert_eq!(bad.status, ExitStatus::Failure);
    let line = bad
        .stdout
        .lines()
        .find(|l| l.starts_with("rule 3 "))
        .unwrap();
    assert!(
        line.starts_with("rule 3 falsified cost at x=1, y=1: lhs 5 rhs 5"),
        "{line}"
    );

    let missing = cli(&["check", &corpus("arith.strs"), &corpus("absent.csi")]);
    assert_eq!(missing.status, ExitStatus::Input);
    assert!(missing.stderr.contains("absent.csi"));
}

#[test]
fn certify_mode_reports_unknown_as_failure() {
    let out = cli(&[
        "check",
        &corpus("arith.strs"),
        &corpus("arith_fixed.csi"),
        "--mode",
        "certify",
    ]);
    assert_eq!(out.status, ExitStatus::Failure);
    assert!(out.stdout.contains("rule 3 certified"));
    assert_eq!(out.field("overall"), Some("unknown"));
    let out = cli(&[
        "check",
        &corpus("addmult.strs"),
        &corpus("addmult.csi"),
        "--mode",
        "certify",
    ]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.field("overall"), Some("certified"));
}

#[test]
fn check_reports_polynomial_bound() {
    let out = cli(&[
        "check",
        &corpus("sumf.strs"),
        &corpus("sumf.csi"),
        "--main",
        "start",
        "--budget",
        "500",
    ]);
    assert_eq!(out.field("mu"), Some("1"));
    assert_eq!(out.field("nu"), Some("0"));
    assert_eq!(
        out.field("bound"),
        Some("2 + x + x*(10 + x + Fc(x) + 7*Fs(x))")
    );
    assert_eq!(out.field("poly-bounded"), Some("true"));
    let out = cli(&[
        "check",
        &corpus("arith.strs"),
        &corpus("arith_fixed.csi"),
        "--main",
        "add",
        "--budget",
        "50",
    ]);
    assert_eq!(out.field("poly-bounded"), Some("false"));
    assert_eq!(out.status, ExitStatus::Failure);
}

#[test]
fn run_strategies() {
    let term = "add (s (s 0)) (s (s (s 0)))";
    let out = cli(&["run", &corpus("arith.strs"), term]);
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(out.field("result"), Some("s (s (s (s (s 0))))"));
    assert_eq!(out.field("steps"), Some("3"));
    let graph = cli(&["run", &corpus("arith.strs"), term, "--strategy", "graph"]);
    assert_eq!(graph.field("result"), out.field("result"));
    assert!(graph.field("steps").unwrap().parse::<u64>().unwrap() <= 3);
    assert!(graph.field("max-nodes").is_some());

    let nf = cli(&["run", &corpus("arith.strs"), "s (s 0)"]);
    assert_eq!(nf.status, ExitStatus::Success);
    assert_eq!(nf.field("steps"), Some("0"));
}

#[test]
fn run_errors() {
    let budget = cli(&[
        "run",
        &corpus("arith.strs"),
        "mult (s (s 0)) (s 0)",
        "--max-steps",
        "1",
    ]);
    assert_eq!(budget.status, ExitStatus::Budget);
    assert_eq!(budget.field("normal-form"), Some("false"));
    let syntax = cli(&["run", &corpus("arith.strs"), "add (s 0"]);
    assert_eq!(syntax.status, ExitStatus::Input);
    let partial = cli(&["run", &corpus("arith.strs"), "add 0"]);
    assert_eq!(partial.status, ExitStatus::Input);
    assert!(partial.stderr.contains("base type"), "{}", partial.stderr);
}

#[test]
fn run_with_oracle_symbol() {
    let dir = tempfile::tempdir().unwrap();
    let table = scratch(dir.path(), "t.otab", "1 -> 00\n");
    let out = cli(&[
        "run",
        &corpus("binadd.strs"),
        "S_f (i :: [])",
        "--oracle",
        &table,
        "--trace",
    ]);
    assert_eq!(out.status, ExitStatus::Success, "{}", out.stderr);
    assert_eq!(out.field("result"), Some("o :: (o :: [])"));
    assert_eq!(
        out.field("step 1 rule"),
        Some("oracle:S_f:1:00 at # nodes 7 -> 9")
    );
}

#[test]
fn compute_sum_with_monitor() {
    let out = cli(&[
        "compute",
        &corpus("sumf.strs"),
        "--main",
        "start",
        "--oracle",
        &corpus("sumf.otab"),
        "--input",
        "0101",
        "--monitor",
        &corpus("sumf.csi"),
    ]);
    assert_eq!(out.status, ExitStatus::Success, "{}", out.stderr);
    assert_eq!(out.field("output"), Some("0001"));
    assert_eq!(out.field("monitor"), Some("ok"));
}

#[test]
fn compute_identity_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let strs = scratch(
        dir.path(),
        "id.strs",
        "sort bit\nsort word\ncons o : bit\ncons i : bit\ncons [] : word\ncons cons : bit -> word -> word\n\
         fn id : (word -> word) -> word -> word\nfn junk : (word -> word) -> word -> word\nfn h : word -> word\n\
         rule id g x -> x\nrule junk g x -> h x\n",
    );
    let out = cli(&["compute", &strs, "--main", "id", "--input", "0110"]);
    assert_eq!(out.status, ExitStatus::Success, "{}", out.stderr);
    assert_eq!(out.field("output"), Some("0110"));
    let out = cli(&["compute", &strs, "--main", "id"]);
    assert_eq!(out.field("output"), Some("_"));

    let stuck = cli(&["compute", &strs, "--main", "junk", "--input", "1"]);
    assert_eq!(stuck.status, ExitStatus::Failure);
    assert!(stuck.stderr.contains("not a word"));

    let miss = cli(&[
        "compute",
        &corpus("sumf.strs"),
        "--main",
        "start",
        "--input",
        "01",
    ]);
    assert_eq!(miss.status, ExitStatus::Input);
    assert!(
        miss.stderr.contains("no entry for query 1"),
        "{}",
        miss.stderr
    );
    let default = cli(&[
        "compute",
        &corpus("sumf.strs"),
        "--main",
        "start",
        "--input",
        "01",
        "--oracle-default",
        "1",
    ]);
    assert_eq!(default.field("output"), Some("01"));
}

#[test]
fn compile_then_check_and_compute() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("oq");
    let prefix = prefix.to_str().unwrap();
    let out = cli(&[
        "compile-otm",
        &corpus("one_query.otm"),
        "--poly",
        "x + 5",
        "--out",
        prefix,
    ]);
    assert_eq!(out.status, ExitStatus::Success, "{}", out.stderr);
    let (strs, csi) = (format!("{prefix}.strs"), format!("{prefix}.csi"));
    let check = cli(&["check", &strs, &csi, "--budget", "200"]);
    assert_eq!(check.status, ExitStatus::Success, "{}", check.stdout);

    let out = cli(&[
        "compile-otm",
        &corpus("one_query.otm"),
        "--poly",
        "3*x + 3*F(x) + 9",
        "--out",
        prefix,
    ]);
    assert_eq!(out.status, ExitStatus::Success);
    let table = scratch(dir.path(), "t.otab", "* -> 0\n10 -> 111\n");
    let got = cli(&[
        "compute", &strs, "--main", "F", "--oracle", &table, "--input", "10",
    ]);
    let want = cli(&[
        "simulate-otm",
        &corpus("one_query.otm"),
        "--oracle",
        &table,
        "--input",
        "10",
    ]);
    assert_eq!(got.field("output"), Some("111"));
    assert_eq!(want.field("output"), Some("111"));

    let bad = cli(&[
        "compile-otm",
        &corpus("one_query.otm"),
        "--poly",
        "x * y",
        "--out",
        prefix,
    ]);
    assert_eq!(bad.status, ExitStatus::Input);
}

#[test]
fn simulate_outcomes() {
    let out = cli(&["simulate-otm", &corpus("identity.otm"), "--input", "11"]);
    assert_eq!(
        (out.field("output"), out.field("steps")),
        (Some("11"), Some("0"))
    );
    let out = cli(&[
        "simulate-otm",
        &corpus("bitflip.otm"),
        "--input",
        "0110",
        "--max-steps",
        "5",
    ]);
    assert_eq!(out.status, ExitStatus::Budget);

    let dir = tempfile::tempdir().unwrap();
    let nondet = scratch(
        dir.path(),
        "n.otm",
        "start a\nfinal z\ntrans a 1 0 0 R z\ntrans a 2 1 1 R z\n",
    );
    assert_eq!(cli(&["simulate-otm", &nondet]).status, ExitStatus::Input);
    let stuck = scratch(dir.path(), "s.otm", "start a\nfinal z\ntrans a 1 0 0 R z\n");
    let out = cli(&["simulate-otm", &stuck, "--input", "1"]);
    assert_eq!(out.status, ExitStatus::Input);
    assert!(out.stderr.contains("stuck"), "{}", out.stderr);
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["frobnicate"]).status, ExitStatus::Input);
    assert_eq!(
        cli(&["run", &corpus("arith.strs")]).status,
        ExitStatus::Input
    );
    assert_eq!(
        cli(&["run", &corpus("arith.strs"), "0", "--strategy", "dag"]).status,
        ExitStatus::Input
    );
    let help = cli(&["--help"]);
    assert_eq!(help.status, ExitStatus::Success);
    assert!(help.stdout.contains("compile-otm"));
}

const GOLDEN: [(&str, &[&str]); 6] = [
    (
        "run_add.out",
        &[
            "run",
            "arith.strs",
            "add (s (s 0)) (s (s (s 0)))",
            "--trace",
        ],
    ),
    (
        "run_explode_graph.out",
        &[
            "run",
            "explode.strs",
            "f (s (s (s 0))) leaf",
            "--strategy",
            "graph",
            "--trace",
        ],
    ),
    (
        "check_arith.out",
        &["check", "arith.strs", "arith.csi", "--seed", "0"],
    ),
    (
        "check_sumf.out",
        &[
            "check",
            "sumf.strs",
            "sumf.csi",
            "--main",
            "start",
            "--budget",
            "2000",
        ],
    ),
    (
        "compute_sumf.out",
        &[
            "compute",
            "sumf.strs",
            "--main",
            "start",
            "--oracle",
            "sumf.otab",
            "--input",
            "0101",
            "--monitor",
            "sumf.csi",
        ],
    ),
    (
        "simulate_bitflip.out",
        &["simulate-otm", "bitflip.otm", "--input", "0110"],
    ),
];

fn corpus_args(args: &[&str]) -> Vec<String> {
    args.iter()
        .map(|a| {
            if a.contains('.') && !a.contains(' ') {
                corpus(a)
            } else {
                a.to_string()
            }
        })
        .collect()
}

#[test]
fn golden_outputs_are_stable() {
    for (file, args) in GOLDEN {
        let want = fs::read_to_string(corpus(&format!("golden/{file}"))).unwrap();
        let args = corpus_args(args);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = cli(&args);
        let second = cli(&args);
        assert_eq!(first, second, "{file}");
        assert_eq!(first.stdout, want, "{file}");
    }
}

#[test]
fn exit_codes() {
    let codes = [
        ExitStatus::Success,
        ExitStatus::Failure,
        ExitStatus::Input,
        ExitStatus::Budget,
    ]
    .map(ExitStatus::code);
    assert_eq!(codes, [0, 1, 2, 3]);
    assert_eq!(
        ExitStatus::of_error(&cstuple::Error::Budget(5).into()),
        ExitStatus::Budget
    );
    assert_eq!(
        ExitStatus::of_error(&cstuple::Error::NotAWord("x".into()).into()),
        ExitStatus::Failure
    );
    assert_eq!(
        ExitStatus::of_error(&cstuple::Error::OracleMiss("1".into()).into()),
        ExitStatus::Input
    );
}
