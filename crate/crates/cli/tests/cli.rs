use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperpctl::bundled;
use hyperpctl::formula::parse_formula;
use hyperpctl::model::parse_model;
use serde_json::Value;
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperpctl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn assert_clean_error(o: &Output) {
    assert_eq!(o.status.code(), Some(2), "stdout: {}\nstderr: {}", stdout(o), stderr(o));
    let err = stderr(o);
    assert!(!err.contains("panicked"), "{err}");
    assert!(!err.contains("RUST_BACKTRACE"), "{err}");
}

#[test]
fn reachability_sentence_holds() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::REACHABILITY_MODEL);
    let formula = w.file("psi.hpctl", bundled::REACHABILITY_SENTENCE);
    let o = run(&["check", "--model", p(&model), "--formula", p(&formula), "--probe", "P(F a@s)"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("SAT\n"), "{out}");
    assert!(out.contains("(0,0) 11/25 (0.44)"), "{out}");
}

#[test]
fn scheduler_violates_noninterference() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::SCHEDULER_MODEL);
    let formula = w.file("ni.hpctl", bundled::SCHEDULER_SENTENCE);
    let o = run(&["check", "--model", p(&model), "--formula", p(&formula)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample: s = 0, t = 5"), "{}", stdout(&o));

    let o = run(&[
        "--format", "json", "check", "--model", p(&model), "--formula", p(&formula),
        "--probe", "P(F l=1@s)",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["verdict"], "UNSAT");
    assert_eq!(v["counterexample"][0]["state"], 0);
    assert_eq!(v["counterexample"][1]["state"], 5);
    assert_eq!(v["probes"]["P(F l=1@s)"]["(5,0)"], "1/4096");
}

#[test]
fn inline_sentences_and_constants() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::TWO_STATE_MODEL);
    let o = run(&["check", "--model", p(&model), "--sentence", "1/2 < 3/4"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["check", "--model", p(&model), "--sentence", "exists s. a@s"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("witness: s = 0"));
}

#[test]
fn reduced_qbfs_check_to_their_truth_value() {
    let w = Workspace::new();
    for (text, code) in [("forall x1. x1", 1), ("exists x1. x1", 0), ("forall x. exists y. x | !y", 0)] {
        let qbf = w.file("q.qbf", text);
        let (model, formula) = (w.path("q.dtmc"), w.path("q.hpctl"));
        let o = run(&[
            "reduce-qbf", "--qbf", p(&qbf), "--model-out", p(&model), "--formula-out", p(&formula),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = run(&["check", "--model", p(&model), "--formula", p(&formula)]);
        assert_eq!(o.status.code(), Some(code), "{text}");
    }
}

#[test]
fn validate_reports_violations() {
    let w = Workspace::new();
    let good = w.file("good.dtmc", bundled::TWO_STATE_MODEL);
    let o = run(&["validate", "--model", p(&good)]);
    assert_eq!(o.status.code(), Some(0));

    let bad = w.file("bad.dtmc", "states: 2\ntransitions:\n0 1 1/2\n1 1 1\n");
    let o = run(&["--format", "json", "validate", "--model", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0], "row 0 sums to 1/2 instead of 1");

    let garbage = w.file("garbage.dtmc", "states: x\n");
    assert_clean_error(&run(&["validate", "--model", p(&garbage)]));
}

#[test]
fn compose_prints_a_loadable_product() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::REACHABILITY_MODEL);
    let o = run(&["compose", "--model", p(&model), "--arity", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let product = parse_model(&stdout(&o)).unwrap();
    assert_eq!(product.state_count(), 25);
    assert!(product.has_label(12, "a_1") && product.has_label(12, "a_2"));

    let o = run(&["--format", "json", "compose", "--model", p(&model), "--arity", "2"]);
    let v = json(&o);
    assert_eq!(v["states"], 25);
    assert_eq!(v["tuples"][7], serde_json::json!([1, 2]));
    assert_clean_error(&run(&["compose", "--model", p(&model), "--arity", "3", "--budget", "100"]));
}

#[test]
fn templates_emit_parseable_sentences() {
    let cases: [&[&str]; 5] = [
        &["template", "noninterference", "--low", "l"],
        &["template", "noninterference", "--low", "l", "--guard", "init"],
        &["template", "qif", "--low", "l=1", "--low", "l=2", "--bound", "1/2"],
        &["template", "differential-privacy", "--factor", "3", "--pre1", "t=y", "--pre2", "t=n", "--out", "r=y"],
        &["template", "causation", "--cause", "c", "--effect", "e", "--guard", "i", "j"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let text = stdout(&o);
        parse_formula(text.trim()).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
    assert_clean_error(&run(&["template", "causation", "--cause", "c", "--effect", "c"]));
    assert_clean_error(&run(&["template", "qif", "--low", "l", "--bound", "x"]));
}

#[test]
fn randomized_response_privacy_template() {
    let w = Workspace::new();
    let model = w.file("rr.dtmc", bundled::RANDOMIZED_RESPONSE_MODEL);
    for (factor, code) in [("3", 0), ("2", 1)] {
        let formula = w.path("dp.hpctl");
        let o = run(&[
            "template", "differential-privacy", "--factor", factor, "--pre1", "t=y", "--pre2", "t=n",
            "--out", "r=y",
        ]);
        std::fs::write(&formula, stdout(&o)).unwrap();
        let o = run(&["check", "--model", p(&model), "--formula", p(&formula)]);
        assert_eq!(o.status.code(), Some(code), "factor {factor}");
    }
}

#[test]
fn bisimulation_template_round_trip() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::REACHABILITY_MODEL);
    let (augmented, formula) = (w.path("aug.dtmc"), w.path("pb.hpctl"));
    for (partition, code) in [("0;1;2;3;4", 0), ("0,1;2;3;4", 1)] {
        let o = run(&[
            "template", "bisimulation", "--model", p(&model), "--partition", partition,
            "--model-out", p(&augmented), "--formula-out", p(&formula),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let o = run(&["check", "--model", p(&augmented), "--formula", p(&formula)]);
        assert_eq!(o.status.code(), Some(code), "{partition}");
    }
    let bad = run(&["template", "bisimulation", "--model", p(&model), "--partition", "0,1;1,2,3,4"]);
    assert_clean_error(&bad);
}

#[test]
fn simulate_estimates_the_reachability_value() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::REACHABILITY_MODEL);
    let o = run(&[
        "--format", "json", "simulate", "--model", p(&model), "--path", "F[0,10] a@s",
        "--trials", "100000", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let estimate = v["estimate"].as_f64().unwrap();
    let se = v["standard_error"].as_f64().unwrap();
    assert!((estimate - 0.44).abs() <= 4.0 * se, "{v}");
    assert_eq!(v["trials"], 100000);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["lower_bound"], false);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));

    let again = run(&[
        "--format", "json", "simulate", "--model", p(&model), "--path", "F[0,10] a@s",
        "--trials", "100000", "--seed", "3",
    ]);
    assert_eq!(json(&again), v);
    assert_clean_error(&run(&[
        "simulate", "--model", p(&model), "--path", "F[0,10] a@s", "--horizon", "5",
    ]));
}

#[test]
fn malformed_input_fails_cleanly() {
    let w = Workspace::new();
    let model = w.file("m.dtmc", bundled::TWO_STATE_MODEL);
    let nonstochastic = w.file("bad.dtmc", "states: 1\ntransitions:\n0 0 1/2\n");
    let missing = w.path("missing.dtmc");
    let bad_qbf = w.file("bad.qbf", "forall x. y");
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "--model", p(&missing), "--sentence", "true"],
        vec!["check", "--model", p(&nonstochastic), "--sentence", "true"],
        vec!["check", "--model", p(&model), "--sentence", "forall s. (a@s"],
        vec!["check", "--model", p(&model), "--sentence", "a@s"],
        vec!["check", "--model", p(&model), "--sentence", "forall s. true", "--probe", "P(F a@t)"],
        vec!["check", "--model", p(&model)],
        vec!["check", "--model", p(&model), "--sentence", "true", "--formula", p(&model)],
        vec!["check", "--model", p(&model), "--sentence", "forall s. true", "--budget", "x"],
        vec!["reduce-qbf", "--qbf", p(&bad_qbf)],
        vec!["simulate", "--model", p(&model), "--path", "G a@s"],
        vec!["simulate", "--model", p(&model), "--path", "X a@s", "--start", "7"],
        vec!["simulate", "--model", p(&model), "--path", "X a@s", "--trials", "0"],
        vec!["--format", "yaml", "validate", "--model", p(&model)],
        vec!["frobnicate"],
    ];
    for args in cases {
        let o = run(&args);
        assert_clean_error(&o);
    }
    let o = run(&["--format", "json", "check", "--model", p(&model), "--sentence", "a@s"]);
    assert_clean_error(&o);
    assert!(json(&o)["error"].as_str().unwrap().contains("not bound"));
}
