use meanlab::catalog::{
    evaluate_gap, linspace, list_cases, logspace, lookup, random_points, sweep, Expected, GridSpec,
    Point, Precision, Verdict,
};
use meanlab::explorer::{
    adjudicate, grid_scan, probe_conjecture, refine, relative_gap, search, PrecisionPolicy,
    SearchConfig, WitnessStatus,
};
use meanlab::report::{search_findings, CaseRecord, ReportEnvelope, RunConfig};
use meanlab::Error;
use proptest::prelude::*;

fn small() -> SearchConfig {
    SearchConfig {
        ln_a: (-4.0, 4.0),
        ln_b: (-4.0, 4.0),
        resolution: 8,
        budget: 150,
        refine_starts: 2,
        ..SearchConfig::default()
    }
}

#[test]
fn four_means_order_full_grid_holds() {
    let grid = GridSpec {
        a: logspace(1e-3, 1e3, 10),
        b: logspace(1e-3, 1e3, 10),
        v: linspace(0.0, 1.0, 10),
        ..GridSpec::default()
    };
    let s = sweep("four_means_order", &grid, Precision::Double, 1e-12).unwrap();
    assert_eq!(s.reports.len(), 1000);
    assert!(s.reports.iter().all(|r| r.verdict != Verdict::Violated));
    assert!(s.min().relative_gap >= -1e-12);
}

#[test]
fn conditional_mix_holds_on_its_domain() {
    let case = lookup("conditional_mix").unwrap();
    let points = random_points(case, 10_000, 11, None);
    let mut checked = 0;
    for pt in points.into_iter().flatten() {
        let v = pt.v.unwrap();
        assert!((v <= 0.5 && pt.a >= pt.b) || (v >= 0.5 && pt.a <= pt.b));
        assert!(case.evaluate(&pt).unwrap().relative_gap >= -1e-12, "{pt:?}");
        checked += 1;
    }
    assert!(checked > 9_990);
    let outside = Point::new(2.0, 1.0).with_v(0.8);
    assert!(matches!(case.check_domain(&outside), Err(Error::DomainViolation { .. })));
}

#[test]
fn every_expected_holds_case_survives_random_points() {
    for (i, case) in list_cases().iter().enumerate() {
        if !matches!(case.expected, Expected::HoldsEverywhere | Expected::Conditional) {
            continue;
        }
        for pt in random_points(case, 2_000, 100 + i as u64, None).into_iter().flatten() {
            let e = case.evaluate(&pt).unwrap();
            assert!(e.relative_gap >= -1e-12, "{} at {pt:?}: {}", case.key, e.relative_gap);
        }
    }
}

#[test]
fn stored_witnesses_match_expectation() {
    for case in list_cases() {
        for w in case.witnesses {
            let pt = w.point();
            let r = adjudicate(case.key, &pt, 50).unwrap();
            match case.expected {
                Expected::FailsSomewhere => assert_eq!(r.verdict, Verdict::Violated, "{}", case.key),
                Expected::HoldsEverywhere => assert_ne!(r.verdict, Verdict::Violated, "{}", case.key),
                Expected::Conditional if case.guaranteed(&pt.parse::<f64>().unwrap()) => {
                    assert_ne!(r.verdict, Verdict::Violated, "{}", case.key)
                }
                _ => {}
            }
        }
    }
}

#[test]
fn collapsing_cases_vanish_at_equal_arguments() {
    let pt = Point::new(3.5, 3.5).with_v(0.3).with_r(0.5).with_p(0.5).to_decimal();
    for key in ["four_means_order", "wlog_half_mix", "conjecture_nested_L", "half_mix_unweighted_L"] {
        let r = adjudicate(key, &pt, 50).unwrap();
        assert_eq!(r.gap, 0.0, "{key}: {}", r.gap_text);
    }
}

#[test]
fn conjecture_samples() {
    let at = |a: f64, b: f64, v: f64| relative_gap("conjecture_nested_L", &Point::new(a, b).with_v(v)).unwrap();
    let gap = evaluate_gap("conjecture_nested_L", &Point::new(10.0, 1.0).with_v(0.25), Precision::Double).unwrap();
    assert!((gap.gap - 0.0173327).abs() < 5e-7);
    assert_eq!(at(10.0, 1.0, 0.5), 0.0);
    assert_eq!(at(2.5, 2.5, 0.2), 0.0);
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let cfg = SearchConfig { seed: 3, ..small() };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                let r = search("wlog_two_thirds", &cfg).unwrap();
                let mut env = ReportEnvelope::new(
                    "search counterexample",
                    &RunConfig::default(),
                    vec![CaseRecord::from_gap(&r.report)],
                    0,
                );
                env.findings = search_findings(&r);
                env.to_json()
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn double_only_policy_reports_double_verdicts() {
    let cfg = SearchConfig { policy: PrecisionPolicy::DoubleOnly, ..small() };
    let r = grid_scan("half_mix_unweighted_L", &cfg).unwrap();
    assert_eq!(r.report.precision, Precision::Double);
    assert_eq!(r.status, WitnessStatus::Violated);
}

#[test]
fn wlog_two_thirds_refines_to_confirmed_witness() {
    let start = Point::new(1.0, 0.5).with_v(0.15);
    let r = refine("wlog_two_thirds", &start, &small()).unwrap();
    assert_eq!(r.status, WitnessStatus::Violated);
    assert!(matches!(r.report.precision, Precision::BigFloat { digits: 50 }));
    assert!(r.report.gap < -r.report.bound);
}

#[test]
fn probe_reports_no_violation() {
    let cfg = SearchConfig { seed: 21, budget: 60, ..small() };
    let e = probe_conjecture(20_000, &cfg).unwrap();
    assert_eq!(e.samples, 20_000);
    assert_ne!(e.result.status, WitnessStatus::Violated);
    assert!(e.result.report.gap >= 0.0 || e.result.status == WitnessStatus::Indeterminate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refine_never_worsens(la in -3.0f64..3.0, lb in -3.0f64..3.0, v in 0.01f64..0.99) {
        let start = Point::new(la.exp(), lb.exp()).with_v(v);
        let g0 = relative_gap("wlog_half_mix", &start).unwrap();
        let cfg = SearchConfig { budget: 40, ..small() };
        let r = refine("wlog_half_mix", &start, &cfg).unwrap();
        prop_assert!(r.double.relative_gap <= g0);
        prop_assert_eq!(r.evaluations > 0, true);
    }

    #[test]
    fn relative_gap_is_scale_free(a in 0.01f64..100.0, b in 0.01f64..100.0, v in 0.0f64..=1.0, k in 0.1f64..10.0) {
        for key in ["four_means_order", "wlog_half_mix", "heinz_chain"] {
            let g1 = relative_gap(key, &Point::new(a, b).with_v(v)).unwrap();
            let g2 = relative_gap(key, &Point::new(k * a, k * b).with_v(v)).unwrap();
            prop_assert!((g1 - g2).abs() < 1e-12, "{}: {} vs {}", key, g1, g2);
        }
    }
}
