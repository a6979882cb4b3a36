use std::process::{Command, Output};

use ca_commlab::audit::AuditReport;
use ca_commlab::commcomp::netpbm::read_netpbm;
use ca_commlab::commcomp::CcReport;
use ca_commlab::problems::{InvasionVerdict, Outcome};
use ca_commlab::Rule;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ca-commlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_rule_110_triangle() {
    let o = run(&[
        "simulate", "eca:110", "--input", "1101001", "--steps", "all", "--format", "text",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1101001\n11101\n011\n1\n");
}

#[test]
fn simulate_cyclic_and_perturbed() {
    let o = run(&[
        "simulate", "eca:170", "--input", "0011", "--cyclic", "--steps", "2",
    ]);
    assert_eq!(stdout(&o), "0011\n0110\n1100\n");
    let o = run(&[
        "simulate",
        "eca:204",
        "--input",
        "1",
        "--background",
        "0",
        "--steps",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(stdout(&o), "t,row\n0,1:1\n1,1:1\n");
}

#[test]
fn pred_value() {
    let o = run(&["pred", "eca:110", "--input", "1101001", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], 1);
}

#[test]
fn matrix_pbm_has_expected_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.pbm");
    let o = run(&[
        "matrix",
        "eca:178",
        "-n",
        "13",
        "-i",
        "6",
        "--format",
        "pbm",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = read_netpbm(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (128, 64));
}

#[test]
fn matrix_csv_has_header() {
    let o = run(&["matrix", "eca:90", "-n", "3", "-i", "1", "--format", "csv"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,c0,c1,c2,c3"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn cc_json_round_trips() {
    let o = run(&[
        "cc",
        "eca:90",
        "-n",
        "7",
        "--method",
        "one-round",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let report = CcReport::from_json(&stdout(&o)).unwrap();
    assert!(report.max_bits <= 1);
    assert_eq!(report.splits.len(), 6);
}

#[test]
fn cc_exact_single_split() {
    let o = run(&["cc", "eca:90", "-n", "4", "-i", "2", "--method", "exact"]);
    let report = CcReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.splits.len(), 1);
    assert_eq!(report.max_bits, 1);
}

#[test]
fn cycle_report() {
    let o = run(&["cycle", "eca:170", "--input", "0001", "-k", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["period"], 4);
    assert_eq!(v["within_k"], true);
}

#[test]
fn invade_exit_codes() {
    let o = run(&["invade", "eca:218", "--background", "0", "--input", "11"]);
    assert!(o.status.success());
    let v: InvasionVerdict = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.outcome, Outcome::Invasion);
    let o = run(&[
        "invade",
        "eca:110",
        "--background",
        "0",
        "--input",
        "1",
        "--budget-steps",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&[
        "invade",
        "eca:94",
        "--background",
        "0",
        "--input",
        "0110",
        "--deciders",
    ]);
    let v: InvasionVerdict = serde_json::from_slice(&o.stdout).unwrap();
    assert!(matches!(
        v.certificate,
        ca_commlab::problems::Certificate::Decider { .. }
    ));
}

#[test]
fn audit_json_round_trips() {
    let o = run(&["audit", "eca:218", "--range", "6"]);
    assert!(o.status.success());
    let report = AuditReport::from_json(&stdout(&o)).unwrap();
    assert!(report.all_verified());
    let o = run(&["audit", "eca:94", "--claim", "94.c-wall-101"]);
    let report = AuditReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.claims.len(), 1);
}

#[test]
fn gallery_list_and_check() {
    let o = run(&["gallery", "list"]);
    assert!(stdout(&o).contains("ip-hard"));
    let o = run(&["gallery", "check", "eca:218"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn rescale_and_rule_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = run(&[
        "rescale",
        "eca:90",
        "-m",
        "2",
        "-t",
        "1",
        "-z",
        "0",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let rule = Rule::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rule.states(), 4);
    let o = run(&["cc", path.to_str().unwrap(), "-n", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn embed_search() {
    let o = run(&["embed", "eca:204", "eca:204"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["found"], true);
    let o = run(&[
        "embed",
        "eca:170",
        "eca:204",
        "--simulate",
        "--max-m",
        "1",
        "--max-t",
        "1",
        "--max-z",
        "1",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["found"], true);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["pred", "eca:999", "--input", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["pred", "nowhere", "--input", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["cc", "eca:90", "-n", "4", "--split", "half"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["matrix", "eca:90", "-n", "3", "-i", "1", "--format", "pgm"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn guards_exit_three() {
    let o = run(&["cc", "eca:30", "-n", "40", "-i", "20"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = run(&["cc", "eca:110", "-n", "8", "--format", "csv"]);
    let b = run(&["cc", "eca:110", "-n", "8", "--format", "csv"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("i,bits,messages,method\n"));
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_ca-commlab"))
        .args(["pred", "eca:90", "--input", "101"])
        .env("CA_COMMLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ca-commlab"))
        .args(["pred", "eca:90", "--input", "101"])
        .env("CA_COMMLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "0\n");
}
