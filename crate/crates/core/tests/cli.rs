mod common;

use std::fs;
use std::process::{Command, Output};

use common::fixture;
use diagcause::causality::Responsibility;
use diagcause::cli::{Report, Status};

fn diagcause(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diagcause"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn report(args: &[&str]) -> Report {
    let out = diagcause(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    Report::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

#[test]
fn diagnose_two_gate() {
    let r = report(&["diagnose", &path("two_gate.model"), "--json"]);
    assert_eq!(r.status, Status::Inconsistent);
    assert_eq!(r.minimal_diagnoses, vec![vec!["abO".to_string()]]);
    assert!(r.minimum_diagnoses.is_none());
    assert!(r.timing_ms.is_none());
    let r = report(&["diagnose", &path("two_gate.model"), "--json", "--minimum", "--all-minimal"]);
    assert_eq!(r.minimum_diagnoses, Some(vec![vec!["abO".to_string()]]));
}

#[test]
fn consistent_model_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ok.model");
    fs::write(&file, "ab: abA\nmodel:\n  !abA -> (x <-> a)\nobs: a, x\n").unwrap();
    let r = report(&["causes", file.to_str().unwrap(), "--json"]);
    assert_eq!(r.status, Status::Consistent);
    assert_eq!(r.minimal_diagnoses, vec![Vec::<String>::new()]);
    assert!(r.causes.is_empty());
}

#[test]
fn causes_routes_print_identical_json() {
    let model = path("two_gate.model");
    let direct = diagcause(&["causes", &model, "--json"]);
    let via = diagcause(&["causes", &model, "--json", "--via-diagnoses"]);
    assert_eq!(direct.stdout, via.stdout);
    let r = Report::from_json(&String::from_utf8(direct.stdout).unwrap()).unwrap();
    assert_eq!(r.causes.len(), 1);
    assert_eq!(r.causes[0].atom.as_deref(), Some("abO"));
    assert!(r.causes[0].counterfactual);
    assert_eq!(r.causes[0].responsibility, Responsibility::ONE);
}

#[test]
fn explain_table_example() {
    let r = report(&["explain-table", &path("four_feature.table"), "--entity", "1,0,0,1", "--json"]);
    let resp: Vec<(String, Responsibility)> = r
        .causes
        .iter()
        .map(|c| (c.feature.clone().unwrap(), c.responsibility))
        .collect();
    let third = Responsibility { num: 1, den: 3 };
    assert_eq!(
        resp,
        [
            ("x1".to_string(), Responsibility::ONE),
            ("x2".to_string(), third),
            ("x3".to_string(), third),
            ("x4".to_string(), third)
        ]
    );
    assert_eq!(r.causes[1].contingency, ["x3", "x4"]);
    assert_eq!(r.causes[1].value, Some(0));
}

#[test]
fn explain_circuit_matches_its_table() {
    let circuit = report(&["explain-circuit", &path("gated_and.circuit"), "--entity", "1,0,1,0", "--json"]);
    assert_eq!(circuit.minimal_diagnoses, [["ab_x2"], ["ab_x4"]]);
    let features: Vec<&str> = circuit.causes.iter().map(|c| c.feature.as_deref().unwrap()).collect();
    assert_eq!(features, ["x2", "x4"]);
    assert!(circuit.causes.iter().all(|c| c.counterfactual));

    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("gated_and.table");
    fs::write(&table, "arity: 4\n1100 1\n1101 1\n1110 1\n1111 1\n1011 1\n").unwrap();
    let table = report(&["explain-table", table.to_str().unwrap(), "--entity", "1,0,1,0", "--json"]);
    assert_eq!(table, circuit);

    let weak = report(&["explain-circuit", &path("gated_and.circuit"), "--entity", "1,0,1,0", "--json", "--weak"]);
    assert_eq!(weak, circuit);
    let same = report(&["explain-circuit", &path("gated_and.circuit"), "--entity", "1,0,1,0", "--desired", "0", "--json"]);
    assert_eq!(same.status, Status::Consistent);
}

#[test]
fn db_causes_example() {
    let r = report(&["db-causes", "--db", &path("path.db"), "--query", &path("path.q"), "--json"]);
    let tuples: Vec<&str> = r.causes.iter().map(|c| c.tuple.as_deref().unwrap()).collect();
    assert_eq!(tuples, ["R(a,d)", "R(b,a)", "R(c,b)", "S(a)", "S(b)", "S(c)", "S(d)"]);
    let rcb = &r.causes[2];
    assert_eq!(rcb.contingency, ["S(a)"]);
    assert_eq!(rcb.responsibility, Responsibility { num: 1, den: 2 });
}

#[test]
fn all_contingencies_flag() {
    let r = report(&[
        "explain-table",
        &path("four_feature.table"),
        "--entity",
        "1,0,0,1",
        "--json",
        "--all-contingencies",
    ]);
    assert_eq!(r.causes[0].all_contingencies, Some(vec![vec![]]));
    assert_eq!(r.causes[1].all_contingencies, Some(vec![vec!["x3".to_string(), "x4".to_string()]]));
}

#[test]
fn timing_is_opt_in() {
    let r = report(&["diagnose", &path("two_gate.model"), "--json", "--timing"]);
    assert!(r.timing_ms.is_some_and(|t| t >= 0.0));
}

#[test]
fn text_output() {
    let out = diagcause(&["causes", &path("two_gate.model")]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("status: inconsistent\n"));
    assert!(text.contains("abO  counterfactual  responsibility 1/1"));
}

#[test]
fn sequential_flag_gives_same_output() {
    let args = ["db-causes", "--db", &path("path.db"), "--query", &path("path.q"), "--json"];
    let par = diagcause(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    assert_eq!(diagcause(&seq_args).stdout, par.stdout);
}

#[test]
fn exit_codes_and_messages() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.model");
    fs::write(&broken, "ab: abA\nmodel:\n  !abA -> (x <->\n").unwrap();
    let out = diagcause(&["diagnose", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("broken.model") && msg.contains("3:"), "{msg}");

    assert_eq!(diagcause(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(diagcause(&["diagnose"]).status.code(), Some(1));
    let out = diagcause(&["explain-table", &path("four_feature.table"), "--entity", "1,0,2,1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = diagcause(&["explain-table", &path("four_feature.table"), "--entity", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("arity"));

    let q = dir.path().join("false.q");
    fs::write(&q, "S(X), R(X,X)\n").unwrap();
    let out = diagcause(&["db-causes", "--db", &path("path.db"), "--query", q.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("query is false"));

    let constant = dir.path().join("const.circuit");
    fs::write(&constant, "features: x1\noutput: O\ndefs:\n  O <-> true\n").unwrap();
    let out = diagcause(&["explain-circuit", constant.to_str().unwrap(), "--entity", "1", "--desired", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("no diagnosis exists"));

    let hopeless = dir.path().join("hopeless.model");
    fs::write(&hopeless, "ab: abA\nmodel:\n  a\nobs: !a\n").unwrap();
    assert_eq!(diagcause(&["diagnose", hopeless.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exogenous_tuples_from_query_file() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("exo.q");
    fs::write(&q, "S(X), R(X,Y), S(Y)\nexo: S(a)\n").unwrap();
    let r = report(&["db-causes", "--db", &path("path.db"), "--query", q.to_str().unwrap(), "--json"]);
    assert!(r.causes.iter().all(|c| c.tuple.as_deref() != Some("S(a)")));
    assert!(r.minimal_diagnoses.iter().flatten().all(|t| t != "S(a)"));
}
