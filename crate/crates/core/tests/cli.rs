use std::process::{Command, Output};

use killing_dims::cli::{parse_table_csv, CheckDocument, KernelDocument, TableDocument, TableRow};
use killing_dims::kernel::Status;
use killing_dims::{Field, Rational};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_killing-dims")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn two_form_table_by_dimension() {
    let o = run(&["table", "--n", "1..5", "--p", "2", "--m", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: TableDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.schema_version, 1);
    let dims: Vec<usize> = doc.rows.iter().map(|r| r.dim).collect();
    assert_eq!(dims, [1, 3, 11, 36, 85]);
    assert!(doc.rows.iter().all(|r| r.status == Status::Exact));
}

#[test]
fn csv_and_json_round_trip() {
    let csv = run(&["table", "--n", "1..3", "--p", "1..2", "--qmax", "4", "--format", "csv"]);
    let json = run(&["table", "--n", "1..3", "--p", "1..2", "--qmax", "4", "--format", "json"]);
    let from_csv = parse_table_csv(&stdout(&csv)).unwrap();
    let doc: TableDocument = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(from_csv, doc.rows);
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", stdout(&json));

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &from_csv {
        w.serialize(r).unwrap();
    }
    assert_eq!(String::from_utf8(w.into_inner().unwrap()).unwrap(), stdout(&csv));
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let to_file = run(&["table", "--n", "2", "--p", "1", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(to_file.stdout.is_empty());
    let direct = run(&["table", "--n", "2", "--p", "1", "--format", "csv"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&direct));
    let rows = parse_table_csv(&stdout(&direct)).unwrap();
    assert_eq!(rows[0], TableRow { n: 2, p: 1, m: 0, q_max: 1, dim: 3, status: Status::Exact });
}

#[test]
fn verify_examples_pass() {
    for args in [
        &["verify", "--suite", "all", "--n", "2", "--p", "2", "--qmax", "4"][..],
        &["verify", "--suite", "factorization", "--n", "3", "--p", "1", "--m", "2", "--qmax", "3"],
        &["verify", "--suite", "closed-form", "--n", "1..4"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    }
    let o = run(&["verify", "--suite", "closed-form", "--n", "1..4", "--format", "json"]);
    let doc: CheckDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(doc.checks.iter().any(|c| c.check.contains("closed form") && c.n == 4 && c.p == Some(2)));
    assert!(doc.checks.iter().all(|c| c.passed));
}

#[test]
fn kernel_examples() {
    let o = run(&["kernel", "--n", "1", "--p", "2", "--m", "0", "--format", "json"]);
    let doc: KernelDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.row.dim, 1);
    assert!(doc.basis.is_none());

    let o = run(&["kernel", "--n", "3", "--p", "2", "--m", "1", "--qmax", "6", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: KernelDocument = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc.row.status, Status::LowerBound);
    assert_eq!(doc.row.q_max, 6);
}

#[test]
fn kernel_basis_coefficients_are_exact() {
    let o = run(&["kernel", "--n", "3", "--p", "2", "--m", "0", "--basis", "--format", "json"]);
    let doc: KernelDocument = serde_json::from_str(&stdout(&o)).unwrap();
    let basis = doc.basis.unwrap();
    assert_eq!(basis.len(), 11);
    assert_eq!(doc.per_block.iter().map(|b| b.dim).collect::<Vec<_>>(), [6, 5, 0]);
    for v in &basis {
        for e in v {
            assert!(e.coeff.contains('/'));
            let c = Rational::parse_fraction(&e.coeff).unwrap();
            assert_eq!(c.to_fraction_string(), e.coeff);
        }
    }
    let csv = run(&["kernel", "--n", "3", "--p", "2", "--m", "0", "--basis", "--format", "csv"]);
    let first = stdout(&csv).lines().next().unwrap().to_string();
    assert_eq!(first, "vector,q,p,hermite,sym,coeff");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["table", "--n", "5..1", "--p", "2"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "nope", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--n", "9", "--p", "1"]).status.code(), Some(2));
    assert_eq!(run(&["table", "--n", "2", "--p", "1", "--jobs", "0"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let o = run(&["table", "--n", "5..1", "--p", "2"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty range"));
}

#[test]
fn forced_run_passes_the_guard() {
    let o = run(&["dims", "--n", "9", "--p", "1", "--force", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "n,p,sym_rank,killing_bound,closed_form_k0\n9,1,9,45,45\n");
}
