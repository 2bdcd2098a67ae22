use std::path::Path;
use std::process::{Command, Output};

use wordeq::model::parse_model;

fn wordeq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wordeq")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn running_example_is_unsat() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "ex.weq", "alphabet: a b\nvars: x y\nx a y = y x\n");
    let o = wordeq(&["solve", &f, "--mode", "quadratic"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("unsat"));
}

#[test]
fn model_is_printed_and_verifies() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "sat.weq", "alphabet: a\nvars: x y\nx y = a x\n");
    let o = wordeq(&["solve", &f, "--model"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (first, rest) = out.split_once('\n').unwrap();
    assert_eq!(first, "sat");
    let m = parse_model(rest).unwrap();
    let input = wordeq::load(Path::new(&f)).unwrap();
    assert!(input.problem.verify(&input.internal_model(&m.strings, &m.ints)));
    assert_eq!(m.strings.len(), 2);
}

#[test]
fn smtlib_with_ints_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let f = write(
        d.path(),
        "i.smt2",
        "(declare-fun x () String)\n(declare-const n Int)\n(assert (= (str.++ x \"a\") (str.++ \"a\" x)))\n\
         (assert (= (str.len x) (+ n 2)))\n(check-sat)\n",
    );
    let o = wordeq(&["solve", &f, "--model"]);
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some("sat"), "{out}");
    let m = parse_model(out.split_once('\n').unwrap().1).unwrap();
    assert_eq!(m.strings["x"].chars().count() as i64, m.ints["n"] + 2);
    let input = wordeq::load(Path::new(&f)).unwrap();
    assert!(input.problem.verify(&input.internal_model(&m.strings, &m.ints)));
}

#[test]
fn input_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.weq", "vars: x\n(x = a\n");
    let o = wordeq(&["solve", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:7"));
    let rep = write(d.path(), "r.smt2", "(declare-const x String)(assert (= x (str.replace x \"a\" \"b\")))");
    let o = wordeq(&["solve", &rep]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("str.replace"));
    let cubic = write(d.path(), "c.weq", "alphabet: a\nvars: x\nx x x = a a a\n");
    assert_eq!(wordeq(&["solve", &cubic, "--mode", "quadratic"]).status.code(), Some(2));
    assert_eq!(wordeq(&["solve", "/nonexistent/file.weq"]).status.code(), Some(2));
}

#[test]
fn iteration_budget_gives_unknown() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "u.weq", "alphabet: a b\nvars: x y\nx a y = y x\n");
    let o = wordeq(&["solve", &f, "--iters", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("unknown"));
}

#[test]
fn trace_writes_reach_sets() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "ex.weq", "alphabet: a b\nvars: x y\nx a y = y x\n");
    let t = d.path().join("trace");
    let o = wordeq(&["solve", &f, "--trace", t.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["reach_0.dot", "reach_1.dot", "processed.dot", "steps.log", "summary.txt"] {
        assert!(t.join(name).is_file(), "{name}");
    }
    let log = std::fs::read_to_string(t.join("steps.log")).unwrap();
    assert!(log.lines().count() >= 3);
    assert!(std::fs::read_to_string(t.join("reach_0.dot")).unwrap().starts_with("digraph"));
}

#[test]
fn bench_writes_one_row_per_instance() {
    let d = tempfile::tempdir().unwrap();
    let inst = d.path().join("in");
    std::fs::create_dir(&inst).unwrap();
    write(&inst, "a.weq", "alphabet: a b\nvars: x y\nx a y = y x\n");
    write(&inst, "b.weq", "alphabet: a\nvars: x y\nx y = a x\n");
    write(&inst, "c.smt2", "(declare-const x String)(assert (= x (str.at x 0)))");
    write(&inst, "notes.md", "ignored");
    let csv_path = d.path().join("out.csv");
    let o = wordeq(&["bench", inst.to_str().unwrap(), "--csv", csv_path.to_str().unwrap(), "--timeout", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let mut r = csv::Reader::from_path(&csv_path).unwrap();
    assert_eq!(r.headers().unwrap(), vec!["instance", "verdict", "iterations", "time_ms", "peak_states"]);
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!((&rows[0][0], &rows[0][1]), ("a.weq", "unsat"));
    assert_eq!((&rows[1][0], &rows[1][1]), ("b.weq", "sat"));
    assert_eq!((&rows[2][0], &rows[2][1]), ("c.smt2", "error"));
    for row in &rows {
        for k in 2..5 {
            row[k].parse::<u128>().unwrap();
        }
    }
}

#[test]
fn oracle_subcommand() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "s.weq", "alphabet: a\nvars: x y\nx y = a x\n");
    let o = wordeq(&["oracle", &f, "--maxlen", "2"]);
    assert_eq!(stdout(&o), "sat\nx = \"\"\ny = \"a\"\n");
    let g = write(d.path(), "u.weq", "alphabet: a b\nvars: x y\nx a y = y x\n");
    let o = wordeq(&["oracle", &g, "--maxlen", "3"]);
    assert_eq!(stdout(&o).lines().next(), Some("unknown"));
}
