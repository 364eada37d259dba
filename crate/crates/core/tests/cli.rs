mod common;

use std::path::Path;
use std::process::{Command, Output};

use redvote::cli::{AnalysisReport, SweepReport};

use common::{example, rel};

fn redvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_redvote"))
        .args(args)
        .env("REDVOTE_NO_COLOR", "1")
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    example(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn first_design_fails_the_threshold() {
    let o = redvote(&["solve", &path("case-study.rvm"), "--threshold", "1e-9"]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("HFR_2oo3    3.3227e-7"), "{text}");
    assert!(text.contains("verdict FAIL"), "{text}");
    assert!(!text.contains('\x1b'));
}

#[test]
fn second_design_passes_the_threshold() {
    let o = redvote(&["solve", &path("case-study-2.rvm"), "--threshold", "1e-9", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    let v = r.verdict.unwrap();
    assert!(v.pass);
    assert!(v.value < 1e-9);
}

#[test]
fn solve_without_threshold_has_no_verdict() {
    let o = redvote(&["solve", &path("case-study.rvm"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.verdict.is_none());
    assert!(rel(r.outputs["phi"]["PAR_4"], 2.19e-6) < 1e-2);
}

#[test]
fn missing_file_is_a_positioned_parse_error() {
    let o = redvote(&["solve", "missing.rvm"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("missing.rvm:1:1: error: cannot read file"), "{}", stderr(&o));
}

#[test]
fn json_report_round_trips_and_is_reproducible() {
    let a = redvote(&["solve", &path("case-study.rvm"), "--format", "json", "--threshold", "1e-9"]);
    let b = redvote(&["solve", &path("case-study.rvm"), "--format", "json", "--threshold", "1e-9"]);
    assert_eq!(a.stdout, b.stdout);
    let r: AnalysisReport = serde_json::from_slice(&a.stdout).unwrap();
    let again = serde_json::to_string_pretty(&r).unwrap() + "\n";
    assert_eq!(again.as_bytes(), a.stdout.as_slice());
    assert_eq!(r.generated_at, 1_700_000_000);
    assert_eq!(r.input.sha256.len(), 64);
}

#[test]
fn report_differs_only_in_timestamp_across_runs() {
    let run = |epoch: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_redvote"))
            .args(["solve", &path("case-study.rvm"), "--format", "json"])
            .env("SOURCE_DATE_EPOCH", epoch)
            .output()
            .unwrap();
        serde_json::from_slice::<AnalysisReport>(&o.stdout).unwrap()
    };
    let (a, mut b) = (run("1"), run("2"));
    assert_ne!(a, b);
    b.generated_at = a.generated_at;
    assert_eq!(a, b);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let o = redvote(&["solve", &path("case-study.rvm"), "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("section,instance,name,value\n"));
    assert!(text.contains("export,,HFR_2oo3,3.32"));
}

#[test]
fn posteriors_table() {
    let o = redvote(&[
        "posteriors",
        &path("case-study.rvm"),
        "phi",
        "--evidence",
        "UNSAFE_OUTPUT=True",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: AnalysisReport = serde_json::from_slice(&o.stdout).unwrap();
    let t = r.posteriors.unwrap();
    assert!((t.probability("Error_due_to_Transient_A", "True").unwrap() - 0.684).abs() < 3e-3);
    assert!((t.probability("Non_detectable_Fault_A", "True").unwrap() - 0.076).abs() < 3e-3);
    assert_eq!(t.probability("UNSAFE_OUTPUT", "True"), Some(1.0));
    assert!(t.rows.windows(2).all(|w| w[0].id <= w[1].id));
}

#[test]
fn posteriors_with_root_evidence() {
    let o = redvote(&["posteriors", &path("case-study.rvm"), "phi", "--evidence", "Fault_A=True", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0,Fault_A,True,1e0,true\n"), "{}", stdout(&o));
}

#[test]
fn posterior_errors() {
    let f = path("case-study.rvm");
    for (args, code) in [
        (vec!["posteriors", &f, "nu"], 3),
        (vec!["posteriors", &f, "mu"], 3),
        (vec!["posteriors", &f, "phi", "--evidence", "Nope=True"], 3),
        (vec!["posteriors", &f, "phi", "--evidence", "Fault_A=Maybe"], 3),
        (vec!["posteriors", &f, "phi", "--evidence", "Fault_A"], 2),
    ] {
        let o = redvote(&args);
        assert_eq!(o.status.code(), Some(code), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn zero_probability_evidence_is_a_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "z.rvm",
        "workflow \"z\" {\n  bayes N { node A states (t, f) cpt (1, 0); }\n  instance n : N { }\n}\n",
    );
    let o = redvote(&["posteriors", &f, "n", "--evidence", "A=f"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn sweep_csv_columns() {
    let o = redvote(&["sweep", &path("case-study.rvm"), "--param", "phi.PAR_1", "--factors", "1,0.1", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header[0], "factor");
    assert_eq!(header[1], "HFR_2oo3");
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    let par5 = header.iter().position(|h| h == "PAR_5").unwrap();
    assert!((rows[0][par5] / rows[1][par5] / 100.0 - 1.0).abs() < 0.1);
}

#[test]
fn single_factor_sweep_equals_solve() {
    let s = redvote(&["sweep", &path("case-study.rvm"), "--param", "phi.PAR_1", "--factors", "1", "--format", "json"]);
    let r = redvote(&["solve", &path("case-study.rvm"), "--format", "json"]);
    let s: SweepReport = serde_json::from_slice(&s.stdout).unwrap();
    let r: AnalysisReport = serde_json::from_slice(&r.stdout).unwrap();
    assert_eq!(s.rows.len(), 1);
    assert_eq!(s.rows[0].exports, r.exports);
}

#[test]
fn sweep_of_reference_bound_input_explains() {
    let o = redvote(&["sweep", &path("case-study.rvm"), "--param", "mu.PAR_4", "--factors", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("derived from phi.PAR_4"), "{}", stderr(&o));
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = redvote(&["validate", &path("case-study.rvm")]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(ok.stdout.is_empty() && ok.stderr.is_empty());

    let cyclic = write(
        dir.path(),
        "c.rvm",
        "workflow \"c\" {\n  instance a : builtin.failure2oo2 { PAR_1 = b.PAR_10; PAR_2 = 0.1; PAR_3 = 0.1; }\n  \
         instance b : builtin.maintenance5 { PAR_4 = a.PAR_4; PAR_5 = a.PAR_5; PAR_6 = 1; PAR_7 = 0.01; \
         PAR_8 = 1e-4; PAR_9 = 3; }\n}\n",
    );
    let o = redvote(&["validate", &cyclic]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("binding cycle: a -> b -> a"), "{}", stderr(&o));

    let unknown = write(dir.path(), "u.rvm", "workflow \"u\" { instance x : builtin.maintenance9 { } }");
    let o = redvote(&["validate", &unknown]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("maintenance9"));

    let selfloop = write(dir.path(), "s.rvm", "workflow \"s\" {\n  ctmc M {\n    state S0 init;\n    rate S0 -> S0 : 1;\n  }\n}\n");
    let o = redvote(&["validate", &selfloop]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("s.rvm:4:5: error: self-loop transition"), "{}", stderr(&o));
}

#[test]
fn solver_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "bad.rvm",
        "workflow \"b\" { instance phi : builtin.failure2oo2 { PAR_1 = 2; PAR_2 = 0.1; PAR_3 = 0.1; } }",
    );
    let o = redvote(&["solve", &f]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(redvote(&[]).status.code(), Some(2));
    assert_eq!(redvote(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(redvote(&["solve", &path("case-study.rvm"), "--format", "xml"]).status.code(), Some(2));
    assert_eq!(redvote(&["--help"]).status.code(), Some(0));
}

#[test]
fn threshold_without_exports_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "e.rvm", "workflow \"e\" { }");
    assert_eq!(redvote(&["solve", &f, "--threshold", "1e-9"]).status.code(), Some(3));
    assert_eq!(redvote(&["solve", &f]).status.code(), Some(0));
    let o = redvote(&["solve", &path("case-study.rvm"), "--threshold", "1e-9", "--metric", "NOPE"]);
    assert_eq!(o.status.code(), Some(3));
    let o = redvote(&["solve", &path("case-study.rvm"), "--threshold", "1e-5", "--metric", "PAR_10"]);
    assert_eq!(o.status.code(), Some(0));
}
