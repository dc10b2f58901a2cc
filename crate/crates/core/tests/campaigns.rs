use crtube::harness::{
    run_report, verify_counterexample, verify_theorem21, Family, GridSpec, ReportConfig, Tolerances,
};
use crtube::{CounterexampleSpec, Error, Params};

fn small() -> GridSpec {
    GridSpec::parse("-0.2:0.2:7,-0.2:0.2:7").unwrap()
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| verify_theorem21(6, 7, &small(), &Tolerances::default()).unwrap().to_json())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn verdicts_are_recomputable_from_records() {
    let cfg = ReportConfig { c: Some(2.0), grid: small(), ..ReportConfig::default() };
    let report = run_report(Family::Example31, &cfg).unwrap();
    assert!(report.passed);
    assert_eq!(report.recomputed_verdicts(), report.verdicts);
    let zero = report.meta.tolerances.zero;
    let flat = report.points.iter().all(|p| p.theta21_norm.abs() < zero);
    assert_eq!(flat, report.verdicts["theta21_flat"]);
}

#[test]
fn other_profiles_give_counterexamples() {
    for (p, c) in [("v + v^2/2 + v^3/6", 1.5), ("sin(v) + v^2", 0.8), ("-exp(v) + 1", -1.0)] {
        let spec = CounterexampleSpec::from_expr(p, c, &Params::new()).unwrap();
        let r = verify_counterexample(&spec, &small(), &Tolerances::default()).unwrap();
        assert!(r.passed, "{p}: {:?}", r.failures());
        assert!(r.verdicts["theta21_flat"] && !r.verdicts["monge_flat"]);
    }
}

#[test]
fn flat_profiles_are_not_counterexamples() {
    // p'' = (1 + v)^(-3/2) solves the Monge equation
    let spec = CounterexampleSpec::from_expr("4 + 2*v - 4*sqrt(1 + v)", 1.0, &Params::new()).unwrap();
    assert!(matches!(
        verify_counterexample(&spec, &small(), &Tolerances::default()),
        Err(Error::PreconditionFailure(_))
    ));
}
