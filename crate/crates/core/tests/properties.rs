use proptest::prelude::*;

use crtube::expr::parse;
use crtube::harness::{parse_csv, run_report, AxisRange, Family, GridSpec, ReportConfig, ResidualReport};
use crtube::surface::check_rank_conditions;
use crtube::{Axis, ConicPoly, Jet, Jet1, Jet2, Params, SurfacePoint};

fn jet1() -> impl Strategy<Value = Jet1<f64>> {
    prop::array::uniform6(-2.0..2.0f64).prop_map(|c| Jet1 { coeffs: c })
}

fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("t1".to_string()),
        Just("t2".to_string()),
        Just("C".to_string()),
        (1u32..20).prop_map(|n| format!("{}", n as f64 / 4.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}*{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}/(2 + {b}^2)")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("(({a})^3)")),
            inner.clone().prop_map(|a| format!("exp({a}/8)")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("log(1 + ({a})^2)")),
        ]
    })
}

proptest! {
    #[test]
    fn division_undoes_multiplication(a in jet1(), b in jet1(), shift in 3.0..5.0f64) {
        let b = b.add_scalar(if b.value() >= 0.0 { shift } else { -shift });
        let back = (a * b).try_div(&b).unwrap();
        for k in 0..6 {
            prop_assert!((back.coeffs[k] - a.coeffs[k]).abs() < 1e-11 * (1.0 + a.coeffs.iter().map(|c| c.abs()).sum::<f64>()));
        }
    }

    #[test]
    fn log_inverts_exp(a in jet1()) {
        let back = a.exp().ln().unwrap();
        for k in 0..6 {
            prop_assert!((back.coeffs[k] - a.coeffs[k]).abs() < 1e-10, "{k}: {back:?} vs {a:?}");
        }
    }

    #[test]
    fn expressions_round_trip_and_agree(src in expression(), t1 in -0.3..0.3f64, t2 in -0.3..0.3f64) {
        let e = parse(&src, &["t1", "t2"]).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, &["t1", "t2"]).unwrap();
        prop_assert_eq!(again.to_string(), printed.clone());
        let params: Params = [("C".to_string(), 1.3)].into_iter().collect();
        let jet = e.eval_jet2(t1, t2, &params).unwrap();
        let value = e.eval_point(&[t1, t2], &params).unwrap();
        prop_assert!((jet.coeff(0, 0) - value).abs() <= 1e-14 * value.abs().max(f64::MIN_POSITIVE), "{printed}: {} vs {value}", jet.coeff(0, 0));
    }

    #[test]
    fn normalized_residuals_ignore_scaling(t1 in -0.2..0.2f64, t2 in -0.2..0.2f64, lambda in 0.01..100.0f64) {
        let e = parse("(t1+C)*log((t1+C)/(C-t2)) - (t1+t2) + t1^3*t2", &["t1", "t2"]).unwrap();
        let params: Params = [("C".to_string(), 1.0)].into_iter().collect();
        let rho = e.eval_jet2(t1, t2, &params).unwrap();
        let a = check_rank_conditions(&SurfacePoint::new(t1, t2, rho).unwrap(), 1e-8).unwrap();
        let b = check_rank_conditions(&SurfacePoint::new(t1, t2, rho.scale(lambda)).unwrap(), 1e-8).unwrap();
        for (x, y) in [(a.theta21, b.theta21), (a.monge_t1, b.monge_t1), (a.monge_ampere, b.monge_ampere)] {
            prop_assert!((x.normalized() - y.normalized()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_display_round_trips(min in -1.0..0.0f64, width in 0.01..1.0f64, n in 2usize..50, m in 2usize..50) {
        let g = GridSpec::new(AxisRange::new(min, min + width, n).unwrap(), AxisRange::new(-width, min + 1.0, m).unwrap());
        prop_assert_eq!(GridSpec::parse(&g.to_string()).unwrap(), g);
        prop_assert_eq!(g.points().len(), n * m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reports_serialize_losslessly(a1 in -0.4..0.4f64, a2 in -0.4..0.4f64, c in 0.5..2.0f64, n in 3usize..6) {
        let p = ConicPoly::new(1.0, a1, a2).unwrap();
        let grid = GridSpec::new(AxisRange::new(-0.1, 0.1, n).unwrap(), AxisRange::new(-0.1, 0.1, n).unwrap());
        let cfg = ReportConfig { conic_p: Some(p), conic_q: Some(p.scaled(c).unwrap()), grid, ..ReportConfig::default() };
        let report = run_report(Family::Conic, &cfg).unwrap();
        prop_assert!(report.passed, "{:?}", report.failures());
        let json = ResidualReport::from_json(&report.to_json()).unwrap();
        let csv = parse_csv(&report.to_csv()).unwrap();
        prop_assert_eq!(&json, &report);
        for (x, y) in csv.iter().zip(&report.points) {
            prop_assert_eq!(x.fields().map(f64::to_bits), y.fields().map(f64::to_bits));
        }
        prop_assert_eq!(json.recomputed_verdicts(), report.verdicts);
    }
}

#[test]
fn bivariate_jets_compose_like_functions() {
    let (x, y) = (Jet2::<f64>::variable(0.3, Axis::T1), Jet2::variable(-0.2, Axis::T2));
    let f = (x * y).exp() + x.sin() * y.cos();
    // Taylor polynomial at a small offset matches the function to order 6
    let h: f64 = 1e-2;
    let exact = ((0.3 + h) * (-0.2 + h)).exp() + (0.3 + h).sin() * (-0.2 + h).cos();
    assert!((f.eval_offset(h, h) - exact).abs() < 1e-12);
}
