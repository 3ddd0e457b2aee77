//! Exercises the binary end to end: exit codes, artifact writing, config
//! error reporting, the external-solver escape hatch, and DIMACS solving.

mod common;

use std::fs;

use fsmx::emit::FsmDoc;

#[test]
fn extract_writes_artifacts_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    common::stage_examples(tmp.path());
    let (code, out, err) = common::run_cli(tmp.path(), &["extract", "example-hashset.json"]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("ExampleImplV1.java: 3 states, 6 transitions"), "{out}");
    assert!(out.contains("wrote example-hashset.dot"), "{out}");
    assert!(out.contains("wrote example-hashset-model.json"), "{out}");

    let json = fs::read(tmp.path().join("example-hashset-model.json")).unwrap();
    let dot = fs::read_to_string(tmp.path().join("example-hashset.dot")).unwrap();
    assert!(dot.starts_with("digraph fsm {"), "{dot}");

    let doc = FsmDoc::from_json_str(std::str::from_utf8(&json).unwrap()).unwrap();
    let round = FsmDoc::from_fsm(&doc.to_fsm().unwrap()).to_json_string();
    assert_eq!(round.as_bytes(), json.as_slice(), "document round trip drifted");

    let (code, _, _) = common::run_cli(tmp.path(), &["extract", "example-hashset.json"]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read(tmp.path().join("example-hashset-model.json")).unwrap(),
        json,
        "re-running must reproduce the artifact byte for byte"
    );
}

#[test]
fn extract_resolves_paths_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let sub = tmp.path().join("sub");
    fs::create_dir(&sub).unwrap();
    common::stage_examples(&sub);
    let (code, out, err) = common::run_cli(tmp.path(), &["extract", "sub/example-hashset.json"]);
    assert_eq!(code, 0, "{out}{err}");
    assert!(sub.join("example-hashset.dot").exists());
    assert!(sub.join("example-hashset-model.json").exists());
}

#[test]
fn usage_and_config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();

    let (code, _, err) = common::run_cli(tmp.path(), &[]);
    assert_eq!(code, 1, "{err}");

    let (code, _, err) = common::run_cli(tmp.path(), &["no-such-command"]);
    assert_eq!(code, 1, "{err}");

    let (code, _, _) = common::run_cli(tmp.path(), &["--help"]);
    assert_eq!(code, 0);

    let (code, _, err) = common::run_cli(tmp.path(), &["extract", "missing.json"]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("error:"), "{err}");

    fs::write(
        tmp.path().join("bad.json"),
        r#"{"sources": ["x.java"], "solvr": "embedded"}"#,
    )
    .unwrap();
    let (code, _, err) = common::run_cli(tmp.path(), &["extract", "bad.json"]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("solvr"), "must name the unknown key: {err}");
}

#[test]
fn analysis_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    common::stage_examples(tmp.path());
    fs::write(
        tmp.path().join("ghost.json"),
        r#"{"sources": ["ExampleImplV1.java"], "state_predicates": ["empty(ghost)"]}"#,
    )
    .unwrap();
    let (code, _, err) = common::run_cli(tmp.path(), &["extract", "ghost.json"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("empty(ghost)"), "{err}");
}

#[test]
fn diff_exit_codes_cover_all_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    common::stage_examples(tmp.path());
    for config in ["example-hashset.json", "example-treeset.json"] {
        let (code, out, err) = common::run_cli(tmp.path(), &["extract", config]);
        assert_eq!(code, 0, "{out}{err}");
    }

    let (code, out, _) = common::run_cli(
        tmp.path(),
        &["diff", "example-hashset-model.json", "example-hashset-model.json"],
    );
    assert_eq!(code, 0);
    assert_eq!(out, "no behavioral differences\n");

    let (code, out, _) = common::run_cli(
        tmp.path(),
        &["diff", "example-hashset-model.json", "example-treeset-model.json"],
    );
    assert_eq!(code, 3);
    assert!(out.contains("only in B"), "{out}");
    assert!(out.contains("only in A"), "{out}");

    let minimal = |alphabet: &str| {
        format!(
            r#"{{"states": [{{"id": "s0", "valuation": {{}}}}], "initial": "s0", "alphabet": ["{alphabet}"], "transitions": []}}"#
        )
    };
    fs::write(tmp.path().join("a.json"), minimal("A")).unwrap();
    fs::write(tmp.path().join("b.json"), minimal("B")).unwrap();
    let (code, _, err) = common::run_cli(tmp.path(), &["diff", "a.json", "b.json"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("error:"), "{err}");

    fs::write(tmp.path().join("broken.json"), "{").unwrap();
    let (code, _, err) = common::run_cli(
        tmp.path(),
        &["diff", "example-hashset-model.json", "broken.json"],
    );
    assert_eq!(code, 2, "{err}");
}

#[test]
fn external_solver_reproduces_the_embedded_result() {
    let tmp = tempfile::tempdir().unwrap();
    common::stage_examples(tmp.path());
    let (code, out, err) = common::run_cli(tmp.path(), &["extract", "example-treeset.json"]);
    assert_eq!(code, 0, "{out}{err}");

    let config = serde_json::json!({
        "sources": ["ExampleImplV2.java"],
        "state_predicates": ["empty(idSet)", "exc"],
        "solver": {"command": common::bin(), "args": ["solve-dimacs"]},
        "output": {"dot": "external.dot", "json": "external-model.json"}
    });
    fs::write(
        tmp.path().join("external.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();
    let (code, out, err) = common::run_cli(tmp.path(), &["extract", "external.json"]);
    assert_eq!(code, 0, "{out}{err}");
    assert_eq!(
        fs::read(tmp.path().join("external-model.json")).unwrap(),
        fs::read(tmp.path().join("example-treeset-model.json")).unwrap(),
        "external solving must agree with the embedded solver"
    );
}

#[test]
fn solve_dimacs_reports_both_outcomes() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("sat.cnf"), "p cnf 2 2\n1 -2 0\n2 0\n").unwrap();
    let (code, out, _) = common::run_cli(tmp.path(), &["solve-dimacs", "sat.cnf"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("s SATISFIABLE\n"), "{out}");
    assert!(out.contains("v 1 2 0"), "{out}");

    fs::write(tmp.path().join("unsat.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    let (code, out, _) = common::run_cli(tmp.path(), &["solve-dimacs", "unsat.cnf"]);
    assert_eq!(code, 0);
    assert_eq!(out, "s UNSATISFIABLE\n");
}

#[test]
fn oracle_check_reports_each_body() {
    let tmp = tempfile::tempdir().unwrap();
    common::stage_examples(tmp.path());
    let (code, out, err) = common::run_cli(tmp.path(), &["oracle-check", "example-hashset.json"]);
    assert_eq!(code, 0, "{out}{err}");
    for method in ["ExampleImpl", "add", "removeId"] {
        assert!(out.contains(method), "missing {method}: {out}");
    }
}
