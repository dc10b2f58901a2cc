use std::process::{Command, Output};

use crtube::harness::{parse_csv, ResidualReport};

fn crtube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crtube")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "-0.2:0.2:5,-0.2:0.2:5";

#[test]
fn example31_verdicts() {
    let out = crtube(&["example31", "--C", "1", "--grid", "-0.2:0.2:21,-0.2:0.2:21"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = ResidualReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.verdicts["theta21_flat"]);
    assert!(!report.verdicts["monge_flat"]);
    assert_eq!(report.points.len(), 441);
    assert_eq!(report.recomputed_verdicts(), report.verdicts);
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    for (path, format) in [(&json, "json"), (&csv, "csv")] {
        let out = crtube(&[
            "verify",
            "counterexample",
            "--p",
            "exp(v) - 1",
            "--C",
            "1",
            "--grid",
            SMALL,
            "--format",
            format,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    let report = ResidualReport::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let rows = parse_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(rows.len(), report.points.len());
    for (a, b) in rows.iter().zip(&report.points) {
        assert_eq!(a.fields().map(f64::to_bits), b.fields().map(f64::to_bits));
    }
}

#[test]
fn theorem21_campaign_passes() {
    let out = crtube(&["verify", "theorem21", "--trials", "100", "--seed", "42"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = ResidualReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.meta.trials, 100);
    assert_eq!(report.meta.seed, Some(42));
}

#[test]
fn degenerate_surface_exits_2() {
    let out = crtube(&["residuals", "--rho", "t1^2 + t2^2", "--grid", SMALL]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("2-nondegeneracy"), "{}", stderr(&out));
}

#[test]
fn unbound_parameter_exits_2() {
    let out = crtube(&["residuals", "--rho", "t1^2/(2*(C - t2))", "--grid", SMALL]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`C`"), "{}", stderr(&out));
    let out = crtube(&["residuals", "--rho", "t1^2/(2*(C - t2))", "--param", "C=1", "--grid", SMALL]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["residuals", "--rho", "t1^2", "--grid", "0:1"][..],
        &["residuals", "--rho", "t1 +", "--grid", SMALL],
        &["residuals", "--rho", "t1^2", "--bogus"],
        &["verify", "prop32", "--p", "exp(v)-1"],
        &["residuals", "--rho", "t1^2", "--param", "C"],
    ] {
        let out = crtube(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty());
    }
    let out = crtube(&["residuals", "--rho", "t1 +", "--grid", SMALL]);
    assert!(stderr(&out).contains("atom :="));
}

#[test]
fn verdict_failure_exits_1() {
    // roundoff in the flat residuals sits far above this zero tolerance
    let out = crtube(&["verify", "prop32", "--p", "exp(v) - 1", "--C", "1", "--grid", SMALL, "--tol", "1e-16"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn selftest_passes() {
    let out = crtube(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("pass ")));
}
