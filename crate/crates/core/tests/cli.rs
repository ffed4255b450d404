use std::path::Path;
use std::process::{Command, Output};

use orb_bergman::report::{ReportData, ReportDocument};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orb-bergman")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orb-bergman"))
        .args(args)
        .env("ORB_BERGMAN_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn coeffs_canonical_reports_root_order_two() {
    let out = run(&["coeffs", "--m", "3", "--canonical-q", "2", "--check-P", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = ReportDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let ReportData::Coeffs(d) = &doc.data else { panic!("wrong kind") };
    assert!(d.condition.holds);
    assert_eq!(d.root_order.to_string(), "2");
    assert!(doc.passed());
}

#[test]
fn violating_coefficients_exit_one() {
    let out = run(&["coeffs", "--m", "3", "--coeffs", r#"{"entries":[[0,"1"]]}"#]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_inputs_exit_two() {
    let out = run(&["kernel", "--model", "football:m=2,t=1", "--rho", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("football requires m odd"));
    assert_eq!(run(&["kernel", "--model", "football:m=3", "--krange", "5:1"]).status.code(), Some(2));
    assert_eq!(run(&["rr", "--model", "flat:m=3"]).status.code(), Some(2));
    assert_eq!(run(&["kernel", "--model", "football:m=3", "--coeffs", "{bad"]).status.code(), Some(2));
    assert_eq!(run(&["coeffs", "--m", "3", "--coeffs", r#"{"entries":[[0,"-1"]]}"#]).status.code(), Some(2));
}

#[test]
fn expand_at_orbifold_point_writes_exact_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "expand", "--model", "football:m=3,t=1", "--canonical-q", "2", "--rho", "0", "--krange", "1:100",
        "--order", "1", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "expand_summary.json")).unwrap();
    let s = &summary[0];
    assert_eq!(s["slope"], "exact");
    assert_eq!(s["b_pred"]["b0"], "9");
    assert!((s["b_hat"][0].as_f64().unwrap() - 9.0).abs() < 1e-9);
    assert!((s["b_hat"][1].as_f64().unwrap() - 27.0).abs() < 1e-8);
    let csv = read(dir.path(), "expand.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,value,fitted,residual"));
    assert!(lines.next().unwrap().starts_with("1,36,"));
}

#[test]
fn kernel_csv_and_json_agree() {
    let out = run(&["kernel", "--model", "football:m=3,t=1", "--canonical-q", "2", "--rho", "0", "--krange", "9:10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "k,point,value,exact_flag,err_bound\n9,0,108,true,0\n10,0,117,true,0\n"
    );
    let out = run(&["kernel", "--model", "flat:m=2", "--x", "0.5", "--krange", "3:3", "--format", "json"]);
    let doc = ReportDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let ReportData::Kernel(rows) = &doc.data else { panic!() };
    assert!(!rows[0].value.is_exact());
    assert!(rows[0].value.err_bound() > 0.0);
}

#[test]
fn reports_are_deterministic_and_roundtrip() {
    let args = ["expand", "--model", "football:m=3,t=1", "--canonical-q", "2", "--rho", "1", "--krange", "20:80", "--format", "json"];
    let a = run_env(&args, "1");
    let b = run_env(&args, "4");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.to_json(), text);
    assert_eq!(doc.header.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn rr_and_necessity_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["rr", "--model", "football:m=3,t=1", "--canonical-q", "2", "--krange", "1:30", "--out", d]);
    assert_eq!(out.status.code(), Some(0));
    let csv = read(dir.path(), "rr.csv");
    assert!(csv.starts_with("k,weighted_h0,predicted,difference\n"));
    assert!(csv.contains("\n6,27,27,0\n") && csv.contains("\n7,30,30,0\n"));

    let out = run(&["rr", "--model", "football:m=3,t=1", "--krange", "1:30", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "violation is detected as periodic");

    let out = run(&["necessity", "--model", "football:m=3,t=1", "--rho", "0", "--krange", "10:100", "--out", d, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = ReportDocument::from_json(&read(dir.path(), "necessity.json")).unwrap();
    let ReportData::Necessity(n) = &doc.data else { panic!() };
    assert_eq!(n.probe.period, Some(3));
}

#[test]
fn localcheck_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["localcheck", "--model", "flat:m=2", "--ks", "11,21", "--krange", "10:60", "--s", "1", "--out", d]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(read(dir.path(), "localcheck_reproducing.csv").starts_with("k,residual\n11,6.02004180077"));
    assert!(read(dir.path(), "localcheck_decay.csv").starts_with("s,v,k,sup_value\n1,1,10,"));
}
